import { SessionApi } from "./api.js";
import { SessionView } from "./view.js";

const base = window.location.pathname.startsWith("/ui") ? "" : "";
const api = new SessionApi(base);
const view = new SessionView(api, document);
view.bind();

const params = new URLSearchParams(window.location.search);
const existing = params.get("session");
if (existing) {
  void view.connect(existing);
}

// debug/test handle
(window as unknown as Record<string, unknown>).__scenloop = view;

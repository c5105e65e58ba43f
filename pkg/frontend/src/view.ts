// The session workbench view: one live session, its turns, code diffs,
// diagnostics and trace playback. The server is the source of truth; the
// view re-hydrates from GET /sessions/{id} whenever the event stream says
// something changed, and never mutates state optimistically.

import { ApiError, SessionApi, SessionEvent, SessionInfo } from "./api.js";
import { changedLines, diffLines } from "./diff.js";
import { DrawCmd, PlaybackModel, advance, drawToCanvas, duration, fitViewport,
         frameAt, newPlayback, renderFrame, setPlayhead,
         terminationCaption } from "./playback.js";
import { RoadMap, parseMap, parseTrace } from "./trace.js";

const COMMENTABLE = new Set(["AwaitingUser", "NeedsUserHelp"]);

export class SessionView {
  session: SessionInfo | null = null;
  codeByTurn = new Map<number, string>();
  playback: PlaybackModel | null = null;
  map: RoadMap | null = null;
  lastFrameCmds: DrawCmd[] = [];
  selectedTurn = 0;
  selectedScene = 0;
  private latestTurnSeen = 0;
  private subscription: { stop: () => void } | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(private api: SessionApi, private root: Document) {}

  private el<T extends HTMLElement>(id: string): T {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
  }

  bind(): void {
    this.el<HTMLButtonElement>("start").addEventListener("click", () => {
      void this.start(this.el<HTMLTextAreaElement>("description").value);
    });
    this.el<HTMLButtonElement>("comment").addEventListener("click", () => {
      void this.submitComment(this.el<HTMLInputElement>("comment-input").value);
    });
    this.el<HTMLButtonElement>("accept").addEventListener("click", () => {
      void this.accept();
    });
    this.el<HTMLButtonElement>("cancel").addEventListener("click", () => {
      void this.cancelTurn();
    });
    this.el<HTMLSelectElement>("turn-select").addEventListener("change", () => {
      this.selectedTurn = parseInt(this.el<HTMLSelectElement>("turn-select").value, 10);
      this.selectedScene = 0;
      void this.renderTurn();
    });
    this.el<HTMLSelectElement>("scene-select").addEventListener("change", () => {
      this.selectedScene = parseInt(this.el<HTMLSelectElement>("scene-select").value, 10);
      void this.loadScene();
    });
    this.el<HTMLInputElement>("diff-toggle").addEventListener("change", () => {
      void this.renderTurn();
    });
    const scrubber = this.el<HTMLInputElement>("scrubber");
    scrubber.addEventListener("input", () => {
      if (!this.playback) return;
      this.playback = setPlayhead(this.playback, parseFloat(scrubber.value));
      this.paint();
    });
    this.el<HTMLButtonElement>("play").addEventListener("click", () => {
      if (!this.playback) return;
      this.playback = { ...this.playback, playing: !this.playback.playing };
      this.el<HTMLButtonElement>("play").textContent =
        this.playback.playing ? "pause" : "play";
    });
    this.timer = setInterval(() => {
      if (this.playback?.playing) {
        this.playback = advance(this.playback, 0.05);
        this.el<HTMLInputElement>("scrubber").value = String(this.playback.playhead);
        this.paint();
      }
    }, 50);
  }

  dispose(): void {
    this.subscription?.stop();
    if (this.timer) clearInterval(this.timer);
  }

  // --- lifecycle ---

  async start(description: string): Promise<void> {
    if (!description.trim()) {
      this.banner("enter a scenario description first", "error");
      return;
    }
    const id = await this.api.createSession(description);
    await this.connect(id);
  }

  async connect(id: string): Promise<void> {
    this.subscription?.stop();
    this.el<HTMLElement>("start-panel").hidden = true;
    this.el<HTMLElement>("session-panel").hidden = false;
    try {
      this.map = parseMap(await this.api.getMapText());
    } catch {
      this.map = null;
    }
    this.session = { id, state: "Generating", turn: 0, turns: [], event_seq: 0 };
    this.subscription = this.api.subscribe(id, 0, (event) => {
      this.onEvent(event);
    });
    await this.refresh();
  }

  private onEvent(event: SessionEvent): void {
    const log = this.el<HTMLElement>("progress-log");
    const line = this.root.createElement("div");
    line.className = `event event-${event.event}`;
    line.textContent = describeEvent(event);
    log.appendChild(line);
    log.scrollTop = log.scrollHeight;
    if (event.event === "state_changed" || event.event === "query_finished"
        || event.event === "scene_ready") {
      void this.refresh();
    }
  }

  async refresh(): Promise<void> {
    if (!this.session) return;
    const session = await this.api.getSession(this.session.id);
    this.session = session;
    const withCode = session.turns.filter((t) => t.has_code);
    const latest = withCode.length ? withCode[withCode.length - 1].turn : 0;
    if (latest > this.latestTurnSeen
        || !withCode.some((t) => t.turn === this.selectedTurn)) {
      // jump to a newly arrived turn (or off a vanished selection)
      this.selectedTurn = latest;
      this.selectedScene = 0;
    }
    this.latestTurnSeen = latest;
    this.renderStatus();
    await this.renderTurn();
  }

  // --- user actions ---

  async submitComment(text: string): Promise<void> {
    if (!this.session || !text.trim()) return;
    try {
      await this.api.comment(this.session.id, text);
      this.el<HTMLInputElement>("comment-input").value = "";
      this.banner("", "");
    } catch (err) {
      this.banner(err instanceof ApiError ? err.message : String(err), "error");
    }
    await this.refresh();
  }

  async accept(): Promise<void> {
    if (!this.session) return;
    try {
      await this.api.accept(this.session.id);
      await this.refresh();
      this.banner(`scenario accepted after turn ${this.session?.turn}`, "success");
    } catch (err) {
      this.banner(err instanceof ApiError ? err.message : String(err), "error");
    }
  }

  async cancelTurn(): Promise<void> {
    if (!this.session) return;
    try {
      await this.api.cancel(this.session.id);
    } catch (err) {
      this.banner(err instanceof ApiError ? err.message : String(err), "error");
    }
  }

  // --- rendering ---

  private renderStatus(): void {
    const session = this.session;
    if (!session) return;
    const badge = this.el<HTMLElement>("state-badge");
    badge.textContent = session.state + (session.busy ? " (working)" : "");
    badge.className = `badge badge-${session.state}`;
    this.el<HTMLElement>("turn-label").textContent =
      `turn ${session.turn}/${session.max_turns ?? 5}`;
    const busy = Boolean(session.busy) || session.state === "Generating";
    const terminal = session.state === "Succeeded" || session.state === "Failed";
    this.el<HTMLInputElement>("comment-input").disabled =
      busy || terminal || !COMMENTABLE.has(session.state);
    this.el<HTMLButtonElement>("comment").disabled =
      busy || terminal || !COMMENTABLE.has(session.state);
    this.el<HTMLButtonElement>("accept").disabled =
      busy || session.state !== "AwaitingUser";
    this.el<HTMLButtonElement>("cancel").disabled = !busy || terminal;
    const diagnostics = session.turns.length
      ? session.turns[session.turns.length - 1].diagnostics : "";
    const panel = this.el<HTMLElement>("diagnostics-view");
    panel.textContent = diagnostics;
    panel.classList.toggle("prominent", session.state === "NeedsUserHelp");
    const turnSelect = this.el<HTMLSelectElement>("turn-select");
    turnSelect.innerHTML = "";
    for (const turn of session.turns.filter((t) => t.has_code)) {
      const option = this.root.createElement("option") as HTMLOptionElement;
      option.value = String(turn.turn);
      option.textContent = `turn ${turn.turn} (${turn.queries} queries)`;
      option.selected = turn.turn === this.selectedTurn;
      turnSelect.appendChild(option);
    }
  }

  async renderTurn(): Promise<void> {
    const session = this.session;
    if (!session || this.selectedTurn === 0) return;
    const code = await this.code(this.selectedTurn);
    const view = this.el<HTMLElement>("code-view");
    view.innerHTML = "";
    const useDiff = this.el<HTMLInputElement>("diff-toggle").checked
      && this.codeByTurn.has(this.selectedTurn - 1);
    if (useDiff) {
      const previous = await this.code(this.selectedTurn - 1);
      for (const line of diffLines(previous, code)) {
        const div = this.root.createElement("div");
        div.className = `line line-${line.kind}`;
        div.textContent = (line.kind === "added" ? "+ "
          : line.kind === "removed" ? "- " : "  ") + line.text;
        view.appendChild(div);
      }
    } else {
      view.textContent = code;
    }
    const turn = session.turns.find((t) => t.turn === this.selectedTurn);
    const sceneSelect = this.el<HTMLSelectElement>("scene-select");
    sceneSelect.innerHTML = "";
    for (const scene of turn?.scenes ?? []) {
      const option = this.root.createElement("option") as HTMLOptionElement;
      option.value = String(scene);
      option.textContent = `scene ${scene} (seed ${turn?.seeds[scene]})`;
      option.selected = scene === this.selectedScene;
      sceneSelect.appendChild(option);
    }
    if ((turn?.scenes ?? []).length > 0) {
      await this.loadScene();
    }
  }

  private async code(turn: number): Promise<string> {
    const cached = this.codeByTurn.get(turn);
    if (cached !== undefined) return cached;
    const code = await this.api.getCode(this.session!.id, turn);
    this.codeByTurn.set(turn, code);
    return code;
  }

  async loadScene(): Promise<void> {
    if (!this.session) return;
    const text = await this.api.getTrace(this.session.id, this.selectedTurn,
                                         this.selectedScene);
    const trace = parseTrace(text);
    this.playback = newPlayback(trace);
    const scrubber = this.el<HTMLInputElement>("scrubber");
    scrubber.min = "0";
    scrubber.max = String(duration(this.playback));
    scrubber.step = "0.1";
    scrubber.value = "0";
    this.paint();
  }

  paint(): void {
    if (!this.playback) return;
    const trace = this.playback.trace;
    const t = this.playback.playhead;
    this.lastFrameCmds = renderFrame(trace, this.map, t);
    this.el<HTMLElement>("playhead-label").textContent =
      `${t.toFixed(1)}s / ${duration(this.playback).toFixed(1)}s`;
    this.el<HTMLElement>("caption").textContent =
      t >= trace.termination.t ? terminationCaption(trace) : "";
    const canvas = this.el<HTMLCanvasElement>("canvas");
    const ctx = canvas.getContext ? canvas.getContext("2d") : null;
    if (ctx) {
      const viewport = fitViewport(trace, canvas.width, canvas.height);
      drawToCanvas(this.lastFrameCmds, ctx, viewport);
    }
  }

  /** The interpolated agent states at the playhead (for tests/debug). */
  currentFrame() {
    if (!this.playback) return null;
    return frameAt(this.playback.trace, this.playback.playhead);
  }

  changedLinesBetween(turnA: number, turnB: number): string[] {
    const a = this.codeByTurn.get(turnA);
    const b = this.codeByTurn.get(turnB);
    if (a === undefined || b === undefined) return [];
    return changedLines(diffLines(a, b)).map((l) => `${l.kind}:${l.text}`);
  }

  private banner(text: string, kind: string): void {
    const banner = this.el<HTMLElement>("banner");
    banner.textContent = text;
    banner.className = kind ? `banner banner-${kind}` : "banner";
    banner.hidden = !text;
  }
}

function describeEvent(event: SessionEvent): string {
  const d = event.data as Record<string, unknown>;
  switch (event.event) {
    case "query_started":
      return `turn ${d.turn}, query ${d.query}: asking the model...`;
    case "query_finished":
      return d.ok ? `turn ${d.turn}, query ${d.query}: executable scenario`
                  : `turn ${d.turn}, query ${d.query}: failed, feeding the error back`;
    case "diagnostics":
      return `diagnostics: ${String(d.text).split("\n")[0]}`;
    case "scene_ready":
      return `scene ${d.scene} simulated (seed ${d.seed}, ${d.termination} `
        + `after ${Number(d.duration).toFixed(1)}s)`;
    case "state_changed":
      return `state: ${d.state}`;
    default:
      return event.event;
  }
}

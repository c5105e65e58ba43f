import pytest

from scenloop.diagnostics import SourceError
from scenloop.dsl import (parse, postprocess_generated, preprocess_training, validate)
from scenloop.dsl.textproc import MAP_PATH_TEMPLATE, strip_comments


def test_comment_removed_from_line():
    line = "param SAFETY_DIST = VerifaiRange(15, 25)  # Increased safety distance\n"
    assert preprocess_training(line) == "param SAFETY_DIST = VerifaiRange(15, 25)\n"


def test_fixed_point_when_nothing_to_do():
    text = "param carla_map = 'Town05'\nEGO_SPEED = 8\n"
    assert preprocess_training(text) == text


def test_map_line_removed():
    text = ("param map = localPath('Scenic/tests/formats/opendrive/maps/CARLA/Town05.xodr')\n"
            "param carla_map = 'Town05'\n")
    assert preprocess_training(text) == "param carla_map = 'Town05'\n"


def test_idempotent_and_line_count_never_grows(reference_sources):
    for source in reference_sources.values():
        once = preprocess_training(source)
        assert preprocess_training(once) == once
        assert once.count("\n") <= source.count("\n")


def test_docstring_and_blank_lines_removed():
    src = '"""\nEgo drives.\n"""\n\nparam carla_map = \'Town05\'\n\nEGO_SPEED = 8\n'
    assert preprocess_training(src) == "param carla_map = 'Town05'\nEGO_SPEED = 8\n"


def test_asset_alias_normalization():
    src = "MODEL = 'vehicle.lincoln.mkz2017'\n"
    assert preprocess_training(src) == "MODEL = 'vehicle.lincoln.mkz_2017'\n"


def test_hash_inside_string_is_not_a_comment():
    assert strip_comments("x = '#keep' # drop") == "x = '#keep' "


def test_postprocess_adds_docstring_and_map_line():
    code = "param carla_map = 'Town05'\nEGO_SPEED = 8\n"
    out = postprocess_generated(code, "Ego vehicle drives straight.")
    lines = out.splitlines()
    assert lines[0] == '"""'
    assert lines[1] == "Ego vehicle drives straight."
    assert lines[2] == '"""'
    assert lines[3] == f"param map = localPath('{MAP_PATH_TEMPLATE.format('Town05')}')"
    assert lines[4] == "param carla_map = 'Town05'"


def test_postprocess_keeps_existing_map_line(right_turn_v1):
    out = postprocess_generated(right_turn_v1, "desc")
    assert out.count("param map = localPath(") == 1


def test_postprocess_missing_map_name():
    with pytest.raises(SourceError) as exc:
        postprocess_generated("EGO_SPEED = 8\n", "desc")
    assert exc.value.diagnostics[0].code == "MissingMapName"


def test_round_trip_preserves_validated_ast(reference_sources):
    for name, source in reference_sources.items():
        original = parse(source)
        doc = "A scenario description."
        rebuilt = parse(postprocess_generated(preprocess_training(source), doc))
        assert rebuilt.statements == original.statements, name
        assert rebuilt.docstring == doc
        assert validate(rebuilt) == []

from scenloop.dsl import parse, unparse, validate
from scenloop.dsl import nodes as n


def codes(diags):
    return [d.code for d in diags]


def test_reference_scenarios_validate_clean(reference_sources):
    for name, source in reference_sources.items():
        assert validate(parse(source)) == [], name


def test_misspelled_builtin_behavior(right_turn_v1):
    source = right_turn_v1.replace(
        "with behaviour FollowTrajectoryBehavior(",
        "with behaviour FolowTrajectoryBehavior(")
    diags = validate(parse(source))
    assert codes(diags) == ["UnknownBehavior"]
    assert "FolowTrajectoryBehavior" in diags[0].message


def test_no_ego_defined(right_turn_v1):
    # drop the ego declaration and its requirements that mention implicit ego
    program = parse(right_turn_v1)
    stripped = n.ScenarioProgram(
        statements=tuple(
            s for s in program.statements
            if not (isinstance(s, n.ObjectDecl) and s.name == "ego")),
        docstring=program.docstring)
    diags = validate(stripped)
    assert "NoEgoDefined" in codes(diags)


def test_unknown_identifier_names_offender():
    src = "ego = Car at egoSpawnPt\n"
    diags = validate(parse(src))
    assert codes(diags) == ["UnknownIdentifier"]
    assert diags[0].message == "name 'egoSpawnPt' is not defined"


def test_unknown_property():
    src = ("spawn = OrientedPoint in network.lanes[0].centerline\n"
           "ego = Car at spawn,\n    with colour 'red'\n")
    diags = validate(parse(src))
    assert codes(diags) == ["UnknownProperty"]
    assert "'colour'" in diags[0].message


def test_unknown_network_attribute_and_param():
    src = ("param SPEED = VerifaiRange(5, 10)\n"
           "x = network.intersction\n"
           "y = globalParameters.SPEEED\n"
           "spawn = OrientedPoint in network.lanes[0].centerline\n"
           "ego = Car at spawn\n")
    diags = validate(parse(src))
    assert codes(diags) == ["UnknownIdentifier", "UnknownIdentifier"]
    assert "intersction" in diags[0].message
    assert "SPEEED" in diags[1].message


def test_type_mismatch_region_compared_to_number():
    src = ("spawn = OrientedPoint in network.lanes[0].centerline\n"
           "ego = Car at spawn\n"
           "require network.drivableRegion > 5\n")
    diags = validate(parse(src))
    assert codes(diags) == ["TypeMismatch"]


def test_type_mismatch_distance_to_string():
    src = ("spawn = OrientedPoint in network.lanes[0].centerline\n"
           "ego = Car at spawn\n"
           "require (distance to 'Town05') > 5\n")
    diags = validate(parse(src))
    assert codes(diags) == ["TypeMismatch"]


def test_behavior_locals_and_params_resolve(ped_cross_v1):
    # flag is a local, trajectory a parameter, ped an object declared later
    assert validate(parse(ped_cross_v1)) == []


def test_validate_accepts_extra_network_symbols():
    src = ("x = network.shoulder\n"
           "spawn = OrientedPoint in network.lanes[0].centerline\n"
           "ego = Car at spawn\n")
    assert codes(validate(parse(src))) == ["UnknownIdentifier"]
    assert validate(parse(src), network_symbols={"shoulder"}) == []


def test_diagnostics_deterministic_bytes(right_turn_v1):
    source = right_turn_v1.replace("egoTrajectory", "egoTrajectoryy", 1)
    a = validate(parse(source))
    b = validate(parse(source))
    assert [d.render() for d in a] == [d.render() for d in b]
    assert a  # the misspelling is reported


def test_validation_survives_unparse_roundtrip(reference_sources):
    for source in reference_sources.values():
        assert validate(parse(unparse(parse(source)))) == []

from __future__ import annotations

import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randsentry import (
    GROUP_COUNTS,
    REGISTRY,
    MitigationKind,
    block_attribute_present,
    detect_partial_mitigation,
    detect_safe_mechanism,
    match_vulnerability_patterns,
    parse_contract,
)
from randsentry.patterns import compiled
from randsentry.textscan import neutralize


HASH_CAST_SNIPPET = """
contract C {
    function random() public view returns (uint) {
        return uint(keccak256(abi.encodePacked(
            block.timestamp, block.difficulty, msg.sender
        ))) % 100;
    }
}
"""


# --- registry shape -----------------------------------------------------------

def test_registry_has_58_patterns_in_9_groups():
    assert len(REGISTRY) == 58
    actual = {}
    for p in REGISTRY:
        actual[p.group] = actual.get(p.group, 0) + 1
    assert actual == GROUP_COUNTS
    assert GROUP_COUNTS == {
        "G1": 10, "G2": 11, "G3": 15, "G4": 1, "G5": 4,
        "G6": 10, "G7": 2, "G8": 3, "G9": 2,
    }


def test_pattern_ids_unique_and_well_formed():
    ids = [p.pattern_id for p in REGISTRY]
    assert len(set(ids)) == len(ids)
    assert all(re.fullmatch(r"G[1-9]\.\d{2}", pid) for pid in ids)


def test_all_expressions_compile():
    for p in REGISTRY:
        compiled(p.pattern_id)


# --- phase-1 keyword filter ----------------------------------------------------

def test_block_attribute_present_in_hash_cast_snippet():
    assert block_attribute_present(HASH_CAST_SNIPPET)


def test_block_attribute_absent():
    assert not block_attribute_present("contract A { uint x; }")


@pytest.mark.parametrize("source,expected", [
    ("uint t = now;", True),
    ("uint snow = 1;", False),
    ("uint x = gasleft();", True),
    ("uint b = blockhash(1);", True),
    ("uint b = myblockhash(1);", False),
    ("uint p = block.prevrandao;", True),
    ("uint c = block.coinbase.balance;", True),
])
def test_block_attribute_token_boundaries(source, expected):
    assert block_attribute_present(source) is expected


def test_now_boundary_matches_reference_word_matcher():
    # Independent word-boundary matcher: split on non-identifier characters.
    for text in ("a now b", "snow", "nowhere", "x=now;", "know now", "now"):
        tokens = re.split(r"[^A-Za-z0-9_$]+", text)
        assert block_attribute_present(text) is ("now" in tokens)


# --- pattern matching -----------------------------------------------------------

def _hits(src: str):
    model = parse_contract(src, "t.sol")
    return match_vulnerability_patterns(src, model), model


def test_hash_cast_snippet_matches_g2_and_g3_in_random():
    hits, _ = _hits(HASH_CAST_SNIPPET)
    groups = {h.group for h in hits}
    assert groups == {"G2", "G3"}
    assert all(h.enclosing_function == "random" for h in hits)


def test_no_attributes_no_hits():
    hits, _ = _hits("contract A { function f() public { uint x = 1; } }")
    assert hits == []


def test_contract_scope_hit_has_no_enclosing_function():
    src = """
    contract A {
        uint seed = block.timestamp;
        function f() public { }
    }
    """
    hits, model = _hits(src)
    assert len(hits) == 1
    hit = hits[0]
    assert hit.group == "G6"
    assert hit.enclosing_function is None
    # confirmed against the parsed spans: outside every body
    for unit in model.contracts:
        for fn in unit.functions:
            inside = fn.body_span[0] <= hit.span[0] and hit.span[1] <= fn.body_span[1]
            assert not inside


def test_comparison_only_timestamp_is_not_a_hit():
    src = """
    contract A {
        uint deadline;
        function f() public { require(block.timestamp > deadline); }
    }
    """
    hits, _ = _hits(src)
    assert hits == []


def test_patterns_ignore_comments_and_strings():
    src = """
    contract A {
        // uint x = block.timestamp % 10;
        string s = "block.timestamp % 10";
        /* seed = block.timestamp; */
        function f() public { }
    }
    """
    hits, _ = _hits(src)
    assert hits == []


def test_multiline_arguments_are_matched():
    src = """
    contract A {
        function f() public view returns (uint) {
            return uint(
                keccak256(
                    abi.encodePacked(
                        block.timestamp,
                        msg.sender
                    )
                )
            ) % 6;
        }
    }
    """
    hits, _ = _hits(src)
    assert {h.group for h in hits} >= {"G2", "G3"}


def test_hit_spans_rematch_their_expressions():
    sources = [
        HASH_CAST_SNIPPET,
        "contract A { uint seed = block.timestamp; }",
        "contract A { function f() public { uint x = block.timestamp % 2; } }",
        "contract A { function f() public { w = players[uint(blockhash(block.number-1)) % n]; } }",
    ]
    for src in sources:
        hits, _ = _hits(src)
        assert hits
        neutral = neutralize(src)
        for h in hits:
            piece = neutral[h.span[0]:h.span[1]]
            assert compiled(h.pattern_id).search(piece), (h.pattern_id, piece)


def test_every_group_represented_in_fixture_suite(ground_truth_dir):
    seen: set[str] = set()
    for path in sorted(ground_truth_dir.glob("v*.sol")):
        src = path.read_text(encoding="utf-8")
        hits, _ = _hits(src)
        seen.update(h.group for h in hits)
    assert seen == {f"G{i}" for i in range(1, 10)}


_SNIPPET_POOL = [
    "uint x = 1;",
    "balances[msg.sender] += 1;",
    "uint r = block.timestamp % 10;",
    "seed = block.timestamp;",
    "winner = players[block.number % players.length];",
    "uint h = uint(keccak256(abi.encodePacked(block.difficulty))) % 2;",
    "require(msg.value > 0);",
    "emit Something(msg.sender);",
    "lastUpdate = block.timestamp;",
    "answer = blockhash(block.number - 1);",
]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(_SNIPPET_POOL), min_size=0, max_size=6))
def test_hits_imply_block_attribute_present(statements):
    body = "\n        ".join(statements)
    src = f"contract P {{\n    function f() public {{\n        {body}\n    }}\n}}\n"
    hits, _ = _hits(src)
    if hits:
        assert block_attribute_present(src)


# --- safe mechanisms -------------------------------------------------------------

def test_vrf_consumer_base_detected():
    src = "contract R is VRFConsumerBase { function f() public { } }"
    model = parse_contract(src, "r.sol")
    assert detect_safe_mechanism(src, model) is MitigationKind.VRF


def test_vrf_markers_detected():
    for marker in ("requestRandomWords(3)", "fulfillRandomness(id, value)"):
        src = f"contract R {{ function f() public {{ {marker}; }} }}"
        model = parse_contract(src, "r.sol")
        assert detect_safe_mechanism(src, model) is MitigationKind.VRF


def test_commit_reveal_detected():
    src = """
    contract CR {
        function commitBid(bytes32 h) public { }
        function revealBid(uint v) public { }
    }
    """
    model = parse_contract(src, "cr.sol")
    assert detect_safe_mechanism(src, model) is MitigationKind.COMMIT_REVEAL


def test_commit_without_reveal_is_not_safe():
    src = "contract CR { function commitBid(bytes32 h) public { } }"
    model = parse_contract(src, "cr.sol")
    assert detect_safe_mechanism(src, model) is None


def test_vrf_takes_precedence_over_commit_reveal():
    src = """
    contract Both is VRFConsumerBase {
        function commitBid(bytes32 h) public { }
        function revealBid(uint v) public { }
    }
    """
    model = parse_contract(src, "b.sol")
    assert detect_safe_mechanism(src, model) is MitigationKind.VRF


def test_plain_lottery_has_no_safe_mechanism():
    src = "contract L { function draw() public { } }"
    model = parse_contract(src, "l.sol")
    assert detect_safe_mechanism(src, model) is None


# --- partial mitigations ----------------------------------------------------------

def test_only_owner_detected_anywhere():
    src = """
    contract M {
        modifier onlyOwner() { _; }
        function withdraw() public onlyOwner { }
        function play() public { }
    }
    """
    model = parse_contract(src, "m.sol")
    assert detect_partial_mitigation(src, model) is MitigationKind.ACCESS_CONTROL


def test_require_owner_comparison_detected():
    src = "contract M { address owner; function f() public { require(owner == msg.sender); } }"
    model = parse_contract(src, "m.sol")
    assert detect_partial_mitigation(src, model) is MitigationKind.ACCESS_CONTROL


def test_tx_origin_detected():
    src = "contract M { function f() public { require(tx.origin == msg.sender); } }"
    model = parse_contract(src, "m.sol")
    assert detect_partial_mitigation(src, model) is MitigationKind.TX_ORIGIN_CHECK


def test_future_block_detected():
    src = "contract M { uint t; function f() public { t = block.number + 20; } }"
    model = parse_contract(src, "m.sol")
    assert detect_partial_mitigation(src, model) is MitigationKind.FUTURE_BLOCK


def test_access_control_wins_over_tx_origin():
    src = """
    contract M {
        modifier onlyOwner() { _; }
        function f() public { require(tx.origin == msg.sender); }
    }
    """
    model = parse_contract(src, "m.sol")
    assert detect_partial_mitigation(src, model) is MitigationKind.ACCESS_CONTROL


def test_no_guards_means_absent():
    src = "contract M { function f() public { } }"
    model = parse_contract(src, "m.sol")
    assert detect_partial_mitigation(src, model) is None


def test_mitigation_tokens_in_comments_do_not_count():
    src = """
    contract M {
        // modifier onlyOwner would go here
        function f() public { }
    }
    """
    model = parse_contract(src, "m.sol")
    assert detect_partial_mitigation(src, model) is None


def test_safe_mechanism_classification():
    assert MitigationKind.VRF.is_safe_mechanism
    assert MitigationKind.COMMIT_REVEAL.is_safe_mechanism
    assert not MitigationKind.ACCESS_CONTROL.is_safe_mechanism
    assert not MitigationKind.TX_ORIGIN_CHECK.is_safe_mechanism
    assert not MitigationKind.FUTURE_BLOCK.is_safe_mechanism

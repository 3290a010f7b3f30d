"""Deterministic generators for synthetic Solidity fixtures.

Three flavors: parser-stress contracts (nested blocks, braces hidden in
strings and comments) for the extractor-equivalence check, call-graph
contracts for validator oracle testing, and corpus filler contracts of about
two hundred lines for throughput runs.
"""

from __future__ import annotations

import random

VISIBILITY_CHOICES = ("public", "external", "internal", "private", None)

_TRICKY_STRINGS = (
    '"}"',
    '"{{{"',
    '"if (x) { y = 1; }"',
    '"\\"}\\""',
    "'}'",
    '"// not a comment }"',
    '"/* not a comment {"',
)

_TRICKY_COMMENTS = (
    "// closing brace } in a line comment",
    "// function fake() public {",
    "/* block comment with } brace */",
    "/* contract Fake { function f() public {} } */",
)


def _statements(rng: random.Random, depth: int, max_depth: int, var_counter: list[int]) -> list[str]:
    out: list[str] = []
    for _ in range(rng.randint(1, 3)):
        roll = rng.random()
        if roll < 0.25 and depth < max_depth:
            inner = _statements(rng, depth + 1, max_depth, var_counter)
            head = rng.choice(("if (x > 1)", "if (x == 0)", "for (uint i = 0; i < 3; i++)", "while (x < 9)"))
            out.append(head + " {")
            out.extend("    " + s for s in inner)
            out.append("}")
        elif roll < 0.4:
            out.append(f"s = {rng.choice(_TRICKY_STRINGS)};")
        elif roll < 0.55:
            out.append(rng.choice(_TRICKY_COMMENTS))
        else:
            var_counter[0] += 1
            out.append(f"uint v{var_counter[0]} = x + {rng.randint(0, 99)};")
    return out


def parser_stress_contract(rng: random.Random) -> str:
    """One contract, up to 10 functions, nesting <= 4, noisy braces."""
    name = f"Gen{rng.randint(0, 10 ** 6)}"
    lines = [f"contract {name} {{", "    uint x;", "    string s;"]
    n_funcs = rng.randint(1, 10)
    var_counter = [0]
    has_ctor = rng.random() < 0.3
    if has_ctor:
        lines.append("    constructor() public {")
        lines.extend("        " + s for s in _statements(rng, 1, 3, var_counter))
        lines.append("    }")
    for k in range(n_funcs):
        vis = rng.choice(VISIBILITY_CHOICES)
        mods = []
        if rng.random() < 0.25:
            mods.append("guarded")
        tail = " ".join(filter(None, [vis, *mods]))
        tail = (" " + tail) if tail else ""
        lines.append(f"    function fn{k}(uint x){tail} {{")
        lines.extend("        " + s for s in _statements(rng, 1, 4, var_counter))
        lines.append("    }")
    if any("guarded" in line for line in lines):
        lines.insert(1, "    modifier guarded() { require(x > 0); _; }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def callgraph_contract(rng: random.Random, n_funcs: int = 6) -> tuple[str, str]:
    """Random call-graph fixture; returns (source, contract name).

    Functions may carry the onlyOwner modifier, contain a weak-randomness
    statement, and call earlier-declared functions; visibility is random.
    The contract always declares onlyOwner so access control is detected at
    contract level.
    """
    name = f"Graph{rng.randint(0, 10 ** 6)}"
    fns = []
    for k in range(n_funcs):
        fns.append({
            "name": f"fn{k}",
            "visibility": rng.choice(("public", "external", "internal", "private")),
            "guarded": rng.random() < 0.4,
            "vulnerable": rng.random() < 0.4,
            "calls": [f"fn{j}" for j in range(n_funcs) if j != k and rng.random() < 0.3],
        })
    if not any(f["vulnerable"] for f in fns):
        rng.choice(fns)["vulnerable"] = True
    lines = [
        f"contract {name} {{",
        "    address owner;",
        "    uint x;",
        "    modifier onlyOwner() { require(msg.sender == owner); _; }",
    ]
    for f in fns:
        mods = " onlyOwner" if f["guarded"] else ""
        lines.append(f"    function {f['name']}() {f['visibility']}{mods} {{")
        if f["vulnerable"]:
            lines.append("        x = block.timestamp % 100;")
        for callee in f["calls"]:
            lines.append(f"        {callee}();")
        lines.append("        x = x + 1;")
        lines.append("    }")
    lines.append("}")
    return "\n".join(lines) + "\n", name


_FILLER_FN = """    function {name}(uint amount) public {{
        require(amount > 0);
        balances[msg.sender] = balances[msg.sender] + amount;
        totalVolume = totalVolume + amount;
        emit Moved(msg.sender, amount);
    }}
"""

_VULN_SNIPPETS = (
    "        uint pick = block.timestamp % 10;\n",
    "        uint pick = uint(keccak256(abi.encodePacked(block.timestamp, msg.sender))) % 100;\n",
    "        uint pick = uint(blockhash(block.number - 1)) % 52;\n",
    "        seed = block.timestamp;\n        uint pick = seed % 7;\n",
)


def corpus_contract(rng: random.Random, index: int, target_lines: int = 200) -> str:
    """Roughly *target_lines*-line contract; one in three carries a weak pattern."""
    vulnerable = index % 3 == 0
    lines = [
        "pragma solidity ^0.8.0;",
        "",
        f"contract Corpus{index} {{",
        "    mapping(address => uint) balances;",
        "    uint totalVolume;",
        "    uint seed;",
        "    uint lastUpdate;",
        "    event Moved(address indexed who, uint amount);",
        "",
        "    function touch() public { lastUpdate = block.timestamp + 1; }",
    ]
    k = 0
    while len(lines) < target_lines - 12:
        lines.extend(_FILLER_FN.format(name=f"op{k}").splitlines())
        k += 1
    if vulnerable:
        lines.append("    function draw() public returns (uint) {")
        lines.append(rng.choice(_VULN_SNIPPETS).rstrip("\n"))
        lines.append("        return pick;")
        lines.append("    }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def lotto_contract(name: str, guard_on_draw: bool) -> str:
    """Access-controlled lottery; the guard either protects draw() or not."""
    draw_mods = " onlyOwner" if guard_on_draw else ""
    admin_mods = "" if guard_on_draw else " onlyOwner"
    return f"""pragma solidity ^0.4.24;

contract {name} {{
    address owner;
    address[] players;

    modifier onlyOwner() {{ require(msg.sender == owner); _; }}

    function join() public payable {{
        players.push(msg.sender);
    }}

    function setHouse(address house) public{admin_mods} {{
        owner = house;
    }}

    function draw() public{draw_mods} returns (address) {{
        uint idx = uint(keccak256(abi.encodePacked(block.timestamp, players.length))) % players.length;
        return players[idx];
    }}
}}
"""

"""Reading and writing designs as JSON, plain text and LaTeX arrays.

Text entries use a small token grammar::

    0            zero
    x3  -x1*     variable / negated conjugate
    x2*/r2       scaled by 1/sqrt(2)
    (x0*+x1)/r2  sum of variables, scaled
    x1I-j*x0Q    coordinate-interleaved variable
    [a,b,c,d]*x0I  general coefficient (a + b r2) + j (c + d r2)

``y`` is accepted in place of ``x`` on input.
"""

from __future__ import annotations

import json
import re
from importlib import resources
from typing import Optional

from .design import I, Q, DesignMatrix, LinearEntry, ZERO_ENTRY
from .exact import INV_SQRT2, ONE, J, Sqrt2Complex, Sqrt2Rational, as_fraction

FORMATS = ("json", "text", "latex")


# --------------------------------------------------------------------------
# JSON


def design_to_json(design: DesignMatrix) -> dict:
    return {
        "p": design.p,
        "n": design.n,
        "k": design.k,
        "entries": [
            [
                [{"var": var, "part": part, "re": c.re.to_json(), "im": c.im.to_json()} for (var, part), c in e.terms]
                for e in row
            ]
            for row in design.entries
        ],
    }


def design_from_json(obj: dict) -> DesignMatrix:
    if "design" in obj:
        obj = obj["design"]
    rows = []
    for row in obj["entries"]:
        rows.append(
            [
                LinearEntry(
                    ((t["var"], t["part"]), Sqrt2Complex(Sqrt2Rational.from_json(t["re"]), Sqrt2Rational.from_json(t["im"])))
                    for t in cell
                )
                for cell in row
            ]
        )
    design = DesignMatrix(rows, k=obj["k"])
    if (design.p, design.n) != (obj["p"], obj["n"]):
        raise ValueError(f"declared size {obj['p']}x{obj['n']} does not match entries {design.p}x{design.n}")
    return design


# --------------------------------------------------------------------------
# text tokens


def _atoms_of(e: LinearEntry):
    """Split ``e`` into atoms sharing one scale, or None."""
    by_var: dict[int, dict] = {}
    for (var, part), c in e.terms:
        by_var.setdefault(var, {})[part] = c
    atoms = []
    for var in sorted(by_var):
        sub = LinearEntry({(var, p): c for p, c in by_var[var].items()})
        atom = sub.as_atom()
        if atom is None:
            return None
        atoms.append(atom)
    if len({a.scale for a in atoms}) != 1:
        return None
    return atoms


def _atom_token(atom, letter: str) -> str:
    return f"{letter}{atom.var}{'*' if atom.conj < 0 else ''}"


def _signed_join(parts: list[tuple[int, str]]) -> str:
    out = ""
    for i, (sign, tok) in enumerate(parts):
        if sign < 0:
            out += "-" + tok
        else:
            out += ("+" if i else "") + tok
    return out


def _ci_parts(e: LinearEntry):
    """``(scale, [(sign, token)...])`` for a coordinate-interleaved entry."""
    (k1, c1), (k2, c2) = e.terms
    if k1[1] == Q:
        (k1, c1), (k2, c2) = (k2, c2), (k1, c1)
    mag = c1.re * c1.re.sign()
    return mag, [(c1.re.sign(), "{L}%dI" % k1[0]), (c2.im.sign(), "j*{L}%dQ" % k2[0])]


def _coef_token(c: Sqrt2Complex) -> str:
    return "[" + ",".join(f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator) for x in c.components()) + "]"


def render_entry(e: LinearEntry, letter: str = "x") -> str:
    if e.is_zero():
        return "0"
    atoms = _atoms_of(e)
    if atoms is not None and atoms[0].scale in (ONE, INV_SQRT2):
        body = _signed_join([(a.sign, _atom_token(a, letter)) for a in atoms])
        if atoms[0].scale == ONE:
            return body
        return f"{body}/r2" if len(atoms) == 1 else f"({body})/r2"
    if e.is_coordinate_interleaved():
        mag, parts = _ci_parts(e)
        body = _signed_join([(s, t.replace("{L}", letter)) for s, t in parts])
        return body if mag == ONE else f"({body})/r2"
    return "+".join(f"{_coef_token(c)}*{letter}{var}{part}" for (var, part), c in e.terms)


_TERM = re.compile(
    r"(?P<sign>[+-])?(?:(?P<coef>\[[^\]]*\])\*|(?P<j>j)\*)?(?P<letter>[xy])(?P<idx>\d+)(?P<suffix>\*|I|Q)?"
)


def _parse_sum(body: str, token: str) -> LinearEntry:
    pos = 0
    out = ZERO_ENTRY
    while pos < len(body):
        m = _TERM.match(body, pos)
        if not m or (pos > 0 and not m.group("sign")):
            raise ValueError(f"cannot parse entry {token!r} near {body[pos:]!r}")
        var = int(m.group("idx"))
        suffix = m.group("suffix")
        if suffix in (I, Q):
            term = LinearEntry({(var, suffix): 1})
        else:
            term = LinearEntry.atom(var, 1, -1 if suffix == "*" else 1)
        if m.group("coef"):
            vals = [as_fraction(v) for v in m.group("coef")[1:-1].split(",")]
            if len(vals) != 4:
                raise ValueError(f"coefficient needs four components in {token!r}")
            term = term.scaled(Sqrt2Complex(Sqrt2Rational(vals[0], vals[1]), Sqrt2Rational(vals[2], vals[3])))
        if m.group("j"):
            term = term.scaled(J)
        out = out - term if m.group("sign") == "-" else out + term
        pos = m.end()
    return out


def parse_entry(token: str) -> LinearEntry:
    s = token.replace(" ", "")
    if s in ("0", "+0", "-0"):
        return ZERO_ENTRY
    scale = None
    if s.endswith("/r2"):
        s = s[:-3]
        scale = INV_SQRT2
    neg = False
    if s.startswith("-(") and s.endswith(")"):
        neg, s = True, s[2:-1]
    elif s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    entry = _parse_sum(s, token)
    if scale is not None:
        entry = entry.scaled(scale)
    return -entry if neg else entry


def render_text(design: DesignMatrix, letter: str = "x") -> str:
    toks = [[render_entry(e, letter) for e in row] for row in design.entries]
    width = max(len(t) for row in toks for t in row)
    lines = [f"p={design.p} n={design.n} k={design.k}"]
    lines += ["  ".join(t.rjust(width) for t in row).rstrip() for row in toks]
    return "\n".join(lines) + "\n"


def parse_text(text: str, k: Optional[int] = None) -> DesignMatrix:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    header = re.fullmatch(r"p=(\d+)\s+n=(\d+)\s+k=(\d+)", lines[0]) if lines else None
    if header:
        lines = lines[1:]
        k = int(header.group(3))
    design = DesignMatrix([[parse_entry(t) for t in ln.split()] for ln in lines], k=k)
    if header and (design.p, design.n) != (int(header.group(1)), int(header.group(2))):
        raise ValueError("text header does not match the matrix body")
    return design


# --------------------------------------------------------------------------
# LaTeX


def _tex_var(letter: str, idx, suffix: str = "") -> str:
    sub = f"{idx}{suffix}"
    return f"{letter}_{sub}" if len(sub) == 1 else f"{letter}_{{{sub}}}"


def _tex_atom(atom, letter: str) -> str:
    return _tex_var(letter, atom.var) + ("^*" if atom.conj < 0 else "")


def render_latex_entry(e: LinearEntry, letter: str = "x") -> str:
    if e.is_zero():
        return "0"
    atoms = _atoms_of(e)
    if atoms is not None and atoms[0].scale in (ONE, INV_SQRT2):
        if len(atoms) == 1 and atoms[0].scale == INV_SQRT2:
            a = atoms[0]
            return ("-" if a.sign < 0 else "") + r"\frac{" + _tex_atom(a, letter) + r"}{\sqrt{2}}"
        body = _signed_join([(a.sign, _tex_atom(a, letter)) for a in atoms])
        return body if atoms[0].scale == ONE else r"\frac{" + body + r"}{\sqrt{2}}"
    if e.is_coordinate_interleaved():
        mag, parts = _ci_parts(e)
        toks = []
        for s, t in parts:
            idx = int(re.search(r"\d+", t).group())
            toks.append((s, ("j" if t.startswith("j") else "") + _tex_var(letter, idx, t[-1])))
        body = _signed_join(toks)
        return body if mag == ONE else r"\frac{" + body + r"}{\sqrt{2}}"
    return r"\mathtt{" + render_entry(e, letter) + "}"


def render_latex(design: DesignMatrix, letter: str = "x") -> str:
    rows = [" & ".join(render_latex_entry(e, letter) for e in row) for row in design.entries]
    body = " \\\\\n".join(rows)
    return "\\left[\\begin{array}{" + "r" * design.n + "}\n" + body + "\n\\end{array}\\right]\n"


def _latex_cell_to_token(cell: str) -> str:
    s = re.sub(r"\s+", "", cell)
    m = re.fullmatch(r"(-?)\\frac\{(.*)\}\{\\sqrt\{2\}\}", s)
    if m:
        inner = _latex_cell_to_token(m.group(2))
        return f"{m.group(1)}({inner})/r2"
    s = re.sub(r"\\mathtt\{(.*)\}", r"\1", s)
    s = re.sub(r"([xy])_\{?(\d+)([IQ]?)\}?", r"\1\2\3", s)
    s = s.replace("^*", "*")
    s = re.sub(r"j([xy]\d+[IQ])", r"j*\1", s)
    return s


def parse_latex(text: str, k: Optional[int] = None) -> DesignMatrix:
    """Parse the first ``array`` environment in ``text``."""
    m = re.search(r"\\begin\{array\}\{[^}]*\}(.*?)\\end\{array\}", text, re.S)
    if not m:
        raise ValueError("no array environment found")
    body = re.sub(r"\\vspace\{[^}]*\}", "", m.group(1))
    rows = []
    for raw in re.split(r"\\\\", body):
        if not raw.strip():
            continue
        rows.append([parse_entry(_latex_cell_to_token(c)) for c in raw.split("&")])
    return DesignMatrix(rows, k=k)


# --------------------------------------------------------------------------
# dispatch


def export(design: DesignMatrix, fmt: str = "json", letter: str = "x") -> bytes:
    if fmt == "json":
        return (json.dumps(design_to_json(design), sort_keys=True, separators=(",", ":")) + "\n").encode()
    if fmt == "text":
        return render_text(design, letter).encode()
    if fmt == "latex":
        return render_latex(design, letter).encode()
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def import_design(data: bytes | str, fmt: Optional[str] = None) -> DesignMatrix:
    text = data.decode() if isinstance(data, bytes) else data
    if fmt is None:
        stripped = text.lstrip()
        fmt = "json" if stripped.startswith("{") else "latex" if "\\begin{array}" in text else "text"
    if fmt == "json":
        return design_from_json(json.loads(text))
    if fmt == "text":
        return parse_text(text)
    if fmt == "latex":
        return parse_latex(text)
    raise ValueError(f"unknown format {fmt!r}")


# --------------------------------------------------------------------------
# fixtures


def fixture_names() -> list[str]:
    root = resources.files(__package__) / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_fixture_record(name: str) -> dict:
    path = resources.files(__package__) / "fixtures" / f"{name}.json"
    return json.loads(path.read_text())


def load_fixture(name: str, as_printed: bool = False) -> DesignMatrix:
    """Fixture design with its recorded cell corrections applied.

    ``as_printed=True`` returns the transcription before corrections.
    """
    record = load_fixture_record(name)
    design = design_from_json(record["design"])
    if as_printed:
        return design
    for fix in record.get("corrections", []):
        i, j = fix["row"], fix["col"]
        if design[i, j] != parse_entry(fix["printed"]):
            raise ValueError(f"fixture {name}: cell ({i},{j}) does not hold the recorded printed value")
        design = design.replace(i, j, parse_entry(fix["corrected"]))
    return design

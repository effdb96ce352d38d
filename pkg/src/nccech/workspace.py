"""Line-oriented workspace files.

A workspace is a sequence of top-level settings and blocks; each block starts
with a header line and ends with ``end``.  ``#`` starts a comment.

    field QQ                      # or GF(p)
    tweight 0                     # weight of t (comma-separated for multigradings)
    window -6:6 cap 16 pmax 2     # weight box, word-length cap, largest Ext degree

    poset P
      elements 0 1 2
      less 0 1
      less 0 2
      meet 1 2 = 0
    end

    algebra A0
      letters x:1 z:-1
      rule x*z -> 1
      rule z*x -> 1
    end

    scheme S on P
      chart 0 A0
      chart 1 A1
      glue 0 1 x=x
    end

    module L on S [level n]       # explicit locally free module
      rank 1
      shift 2 -1                  # per chart, one weight per basis vector (default 0)
      psi 0 2 [[x]]               # default: identity matrix
    end
    module O = structure S
    module T = O + L
    module L2 = twist L by 1

    complex C on S
      term 0 O
      term 1 L
      map 0 chart 0 [[x]]
    end

    tower Q
      scheme S
      levels 3
      override 2 rule 1 s*x -> x*s + 2*t*x
      override 2 glue 0 2 y=z
    end

Errors are collected with their line numbers and raised together.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field as dc_field

from .algebra import build_algebra
from .cech import ModuleComplex
from .coeff import ArtinRing, Field, Window, parse_weight
from .qcoh import LocallyFreeModule, ModuleMap, direct_sum, structure_module, transport, twist
from .rewrite import RewriteError
from .scheme import ChartSpec, DeformationTower, MeetPoset, PosetError, SchemeSpec

DEFAULT_WINDOW = "-6:6"
HIGH_ORDER = 32  # nilpotency order used only to check the homogeneity of rule text


class WorkspaceError(ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join("line %d: %s" % e for e in self.errors))


@dataclass
class _Block:
    kind: str
    header: list
    line: int
    body: list = dc_field(default_factory=list)  # [(line, tokens, raw)]


def parse_matrix_literal(text: str) -> list:
    """``[[a, b], [c, d]]`` -> ``[["a", "b"], ["c", "d"]]`` (entries kept as text)."""
    s = text.strip()
    if not (s.startswith("[[") and s.endswith("]]")):
        raise ValueError("matrix must look like [[a, b], [c, d]]")
    rows = re.split(r"\]\s*,\s*\[", s[2:-2])
    out = []
    for r in rows:
        out.append([e.strip() for e in r.split(",")])
    if any(len(r) != len(out[0]) for r in out) or any(e == "" for r in out for e in r):
        raise ValueError("ragged or empty matrix entries")
    return out


def _weight(text: str):
    return parse_weight(text)


@dataclass
class ModuleDecl:
    name: str
    kind: str  # explicit | structure | sum | twist
    line: int
    scheme: str | None = None
    level: int = 1
    rank: int = 0
    shifts: dict = dc_field(default_factory=dict)
    psi: dict = dc_field(default_factory=dict)
    parts: list = dc_field(default_factory=list)
    offset: tuple | None = None


@dataclass
class ComplexDecl:
    name: str
    scheme: str
    line: int
    terms: dict = dc_field(default_factory=dict)  # q -> module name
    maps: dict = dc_field(default_factory=dict)  # q -> {chart: matrix text}


@dataclass
class TowerDecl:
    name: str
    scheme: str
    levels: int
    line: int
    overrides: dict = dc_field(default_factory=dict)


class Workspace:
    def __init__(self, text: str, path: str = "<string>"):
        self.path = path
        self.text = text
        self.digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
        self.field = Field()
        self.t_weight = None
        self.window = None
        self.length_cap = 16
        self.pmax = 2
        self.posets = {}
        self.algebras = {}  # name -> (letters, rules, line)
        self.specs = {}
        self.modules = {}
        self.complexes = {}
        self.towers = {}
        self._schemes = {}
        self._built = {}
        self._errors = []
        self._parse()
        if self._errors:
            raise WorkspaceError(self._errors)

    @classmethod
    def load(cls, path: str) -> "Workspace":
        with open(path, encoding="utf-8") as fh:
            return cls(fh.read(), path)

    # -- parsing ---------------------------------------------------------------

    def _err(self, line: int, msg: str):
        self._errors.append((line, msg))

    def _parse(self):
        blocks = []
        cur = None
        for n, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            toks = line.split()
            if cur is not None:
                if toks == ["end"]:
                    blocks.append(cur)
                    cur = None
                else:
                    cur.body.append((n, toks, line))
                continue
            head = toks[0]
            if head == "field":
                self._parse_field(n, toks)
            elif head == "tweight":
                try:
                    self.t_weight = _weight(" ".join(toks[1:]))
                except ValueError as e:
                    self._err(n, "bad tweight: %s" % e)
            elif head == "window":
                self._parse_window(n, toks)
            elif head == "module" and "=" in toks:
                self._parse_module_alias(n, line)
            elif head in ("poset", "algebra", "scheme", "module", "complex", "tower"):
                cur = _Block(head, toks[1:], n)
            else:
                self._err(n, "unknown statement %r" % head)
        if cur is not None:
            self._err(cur.line, "block %s %s is not closed by 'end'" % (cur.kind, " ".join(cur.header)))
        if self.t_weight is None:
            self.t_weight = (0,)
        for b in blocks:
            getattr(self, "_block_" + b.kind)(b)
        self._check_references()

    def _check_references(self):
        """Names used by modules and complexes must be declared somewhere in the file."""
        for d in self.modules.values():
            if d.scheme is not None and d.scheme not in self.specs:
                self._err(d.line, "module %s: unknown scheme %r" % (d.name, d.scheme))
            for part in d.parts:
                if part not in self.modules:
                    self._err(d.line, "module %s: unknown module %r" % (d.name, part))
        for c in self.complexes.values():
            for q, (m, line) in sorted(c.terms.items()):
                if m not in self.modules:
                    self._err(line, "complex %s: unknown module %r in degree %d" % (c.name, m, q))

    def _parse_field(self, n, toks):
        if len(toks) != 2:
            self._err(n, "usage: field QQ | field GF(p)")
            return
        m = re.fullmatch(r"GF\((\d+)\)", toks[1])
        try:
            if toks[1] == "QQ":
                self.field = Field()
            elif m:
                self.field = Field(int(m.group(1)))
            else:
                raise ValueError("unknown field %r" % toks[1])
        except ValueError as e:
            self._err(n, str(e))

    def _parse_window(self, n, toks):
        try:
            self.window = Window.parse(toks[1])
            rest = toks[2:]
            while rest:
                key, val, rest = rest[0], rest[1], rest[2:]
                if key == "cap":
                    self.length_cap = int(val)
                elif key == "pmax":
                    self.pmax = int(val)
                else:
                    raise ValueError("unknown window option %r" % key)
        except (ValueError, IndexError) as e:
            self._err(n, "bad window line: %s" % e)

    def _block_poset(self, b):
        if len(b.header) != 1:
            self._err(b.line, "usage: poset NAME")
            return
        elements, less, meets = None, [], {}
        for n, toks, _ in b.body:
            try:
                if toks[0] == "elements":
                    elements = toks[1:]
                elif toks[0] == "less" and len(toks) == 3:
                    less.append((toks[1], toks[2], n))
                elif toks[0] == "meet" and len(toks) == 5 and toks[3] == "=":
                    meets[(toks[1], toks[2])] = (toks[4], n)
                else:
                    raise ValueError("expected 'elements ...', 'less a b' or 'meet a b = m'")
            except ValueError as e:
                self._err(n, str(e))
        if not elements:
            self._err(b.line, "poset %s has no elements" % b.header[0])
            return
        ok = True
        for (a, c, n) in less:
            for e in (a, c):
                if e not in elements:
                    self._err(n, "unknown poset element %r" % e)
                    ok = False
        for (a, c), (m, n) in meets.items():
            for e in (a, c, m):
                if e not in elements:
                    self._err(n, "meet %s %s = %s: %r is not an element of the poset" % (a, c, m, e))
                    ok = False
        if not ok:
            return
        try:
            self.posets[b.header[0]] = MeetPoset(elements, [(a, c) for a, c, _ in less],
                                                 {k: v[0] for k, v in meets.items()})
        except PosetError as e:
            self._err(b.line, str(e))

    def _block_algebra(self, b):
        if len(b.header) != 1:
            self._err(b.line, "usage: algebra NAME")
            return
        letters, rules = [], []
        for n, toks, raw in b.body:
            if toks[0] == "letters":
                for tok in toks[1:]:
                    name, _, w = tok.partition(":")
                    try:
                        letters.append((name, _weight(w)))
                    except ValueError:
                        self._err(n, "bad letter declaration %r (use name:weight)" % tok)
            elif toks[0] == "rule":
                rules.append((raw[len("rule"):].strip(), n))
            else:
                self._err(n, "expected 'letters' or 'rule'")
        ring = ArtinRing(self.field, HIGH_ORDER, tuple(self.t_weight))
        for k in range(len(rules) + 1):
            try:
                build_algebra(b.header[0], letters, [r for r, _ in rules[:k]], ring)
            except (RewriteError, ValueError) as e:
                self._err(rules[k - 1][1] if k else b.line, str(e))
                return
        self.algebras[b.header[0]] = (letters, [r for r, _ in rules], b.line)

    def _block_scheme(self, b):
        if len(b.header) != 3 or b.header[1] != "on":
            self._err(b.line, "usage: scheme NAME on POSET")
            return
        name, pname = b.header[0], b.header[2]
        P = self.posets.get(pname)
        if P is None:
            self._err(b.line, "unknown poset %r" % pname)
            return
        charts, gluings, cap, tw = {}, {}, self.length_cap, tuple(self.t_weight)
        for n, toks, _ in b.body:
            if toks[0] == "chart" and len(toks) == 3:
                if toks[1] not in P.elements:
                    self._err(n, "chart %r is not a poset element" % toks[1])
                elif toks[2] not in self.algebras:
                    self._err(n, "unknown algebra %r" % toks[2])
                else:
                    letters, rules, _ = self.algebras[toks[2]]
                    charts[toks[1]] = ChartSpec(toks[2], letters, rules)
            elif toks[0] == "glue" and len(toks) >= 3:
                key = (toks[1], toks[2])
                known = all(e in P.elements for e in key)
                if not (known and P.lt(*key)):
                    self._err(n, "glue %s %s: not a relation %s < %s of the poset" % (key + key))
                    continue
                imgs = {}
                for tok in toks[3:]:
                    letter, _, img = tok.partition("=")
                    if not img:
                        self._err(n, "bad image %r (use letter=expression)" % tok)
                    imgs[letter] = img
                gluings[key] = (imgs, n)
            elif toks[0] == "tweight":
                tw = _weight(" ".join(toks[1:]))
            else:
                self._err(n, "expected 'chart i ALG' or 'glue i j letter=image ...'")
        missing = [e for e in P.elements if e not in charts]
        if missing:
            self._err(b.line, "scheme %s: no chart for %s" % (name, ", ".join(missing)))
            return
        for rel in P.relations():
            if rel not in gluings:
                self._err(b.line, "scheme %s: missing glue %s %s" % (name, rel[0], rel[1]))
        spec = SchemeSpec(name, P, charts, {k: v[0] for k, v in gluings.items()}, self.field, tw, cap)
        try:
            S = spec.instantiate(1)
        except (RewriteError, ValueError, KeyError) as e:
            self._err(b.line, "scheme %s: %s" % (name, e))
            return
        for key, (imgs, n) in gluings.items():
            src = S.algebras[key[1]].alphabet
            for letter in imgs:
                if letter not in src.letters:
                    self._err(n, "letter %r does not belong to chart %s" % (letter, key[1]))
            for letter in src.letters:
                if letter not in imgs:
                    self._err(n, "glue %s %s: no image for letter %r" % (key[0], key[1], letter))
        self.specs[name] = spec
        self._schemes[(name, 1)] = S

    def _parse_module_alias(self, n, line):
        m = re.fullmatch(r"module\s+(\S+)\s*=\s*(.+)", line)
        if not m:
            self._err(n, "usage: module NAME = structure S | A + B | twist A by W")
            return
        name, rhs = m.group(1), m.group(2).strip()
        if name in self.modules:
            self._err(n, "module %s declared twice" % name)
            return
        toks = rhs.split()
        if toks[0] == "structure" and len(toks) in (2, 4):
            level = int(toks[3]) if len(toks) == 4 and toks[2] == "level" else 1
            self.modules[name] = ModuleDecl(name, "structure", n, scheme=toks[1], level=level)
        elif toks[0] == "twist" and len(toks) == 4 and toks[2] == "by":
            self.modules[name] = ModuleDecl(name, "twist", n, parts=[toks[1]], offset=_weight(toks[3]))
        else:
            parts = [p.strip() for p in rhs.split("+")]
            self.modules[name] = ModuleDecl(name, "sum", n, parts=parts)

    def _block_module(self, b):
        h = b.header
        if len(h) not in (3, 5) or h[1] != "on" or (len(h) == 5 and h[3] != "level"):
            self._err(b.line, "usage: module NAME on SCHEME [level n]")
            return
        decl = ModuleDecl(h[0], "explicit", b.line, scheme=h[2], level=int(h[4]) if len(h) == 5 else 1)
        for n, toks, raw in b.body:
            try:
                if toks[0] == "rank":
                    decl.rank = int(toks[1])
                elif toks[0] == "shift":
                    decl.shifts[toks[1]] = ([_weight(x) for x in toks[2:]], n)
                elif toks[0] == "psi":
                    decl.psi[(toks[1], toks[2])] = (parse_matrix_literal(raw.split(None, 3)[3]), n)
                else:
                    raise ValueError("expected 'rank', 'shift' or 'psi'")
            except (ValueError, IndexError) as e:
                self._err(n, str(e))
        if decl.name in self.modules:
            self._err(b.line, "module %s declared twice" % decl.name)
        self.modules[decl.name] = decl

    def _block_complex(self, b):
        if len(b.header) != 3 or b.header[1] != "on":
            self._err(b.line, "usage: complex NAME on SCHEME")
            return
        decl = ComplexDecl(b.header[0], b.header[2], b.line)
        for n, toks, raw in b.body:
            try:
                if toks[0] == "term":
                    decl.terms[int(toks[1])] = (toks[2], n)
                elif toks[0] == "map" and toks[2] == "chart":
                    decl.maps.setdefault(int(toks[1]), {})[toks[3]] = (
                        parse_matrix_literal(raw.split(None, 4)[4]), n)
                else:
                    raise ValueError("expected 'term q MODULE' or 'map q chart i [[..]]'")
            except (ValueError, IndexError) as e:
                self._err(n, str(e))
        self.complexes[decl.name] = decl

    def _block_tower(self, b):
        if len(b.header) != 1:
            self._err(b.line, "usage: tower NAME")
            return
        scheme, levels, ov = None, None, {}
        for n, toks, raw in b.body:
            try:
                if toks[0] == "scheme":
                    scheme = toks[1]
                elif toks[0] == "levels":
                    levels = int(toks[1])
                elif toks[0] == "override" and toks[2] == "rule":
                    rule = raw.split(None, 4)[4]
                    lhs = rule.split("->")[0].strip()
                    ov.setdefault(int(toks[1]), {}).setdefault("rules", {}).setdefault(toks[3], {})[lhs] = rule
                elif toks[0] == "override" and toks[2] == "glue":
                    imgs = dict(t.split("=", 1) for t in toks[5:])
                    ov.setdefault(int(toks[1]), {}).setdefault("gluings", {})[(toks[3], toks[4])] = imgs
                else:
                    raise ValueError("expected 'scheme', 'levels' or 'override n rule|glue ...'")
            except (ValueError, IndexError) as e:
                self._err(n, str(e))
        if scheme not in self.specs:
            self._err(b.line, "tower %s: unknown scheme %r" % (b.header[0], scheme))
            return
        if not levels or levels < 1:
            self._err(b.line, "tower %s needs 'levels N' with N >= 1" % b.header[0])
            return
        self.towers[b.header[0]] = TowerDecl(b.header[0], scheme, levels, b.line, ov)

    # -- resolution --------------------------------------------------------------

    def require_window(self) -> Window:
        if self.window is None:
            return Window.parse(DEFAULT_WINDOW if len(self.t_weight) == 1
                                else ",".join([DEFAULT_WINDOW] * len(self.t_weight)))
        return self.window

    def scheme(self, name: str, level: int = 1):
        key = (name, level)
        if key not in self._schemes:
            if name not in self.specs:
                raise WorkspaceError([(0, "unknown scheme %r" % name)])
            self._schemes[key] = self.specs[name].instantiate(level)
        return self._schemes[key]

    def module(self, name: str) -> LocallyFreeModule:
        if name in self._built:
            return self._built[name]
        d = self.modules.get(name)
        if d is None:
            raise WorkspaceError([(0, "unknown module %r" % name)])
        try:
            if d.kind == "structure":
                M = structure_module(self.scheme(d.scheme, d.level), name)
            elif d.kind == "sum":
                parts = [self.module(p) for p in d.parts]
                M = parts[0] if len(parts) == 1 else direct_sum(parts, name)
            elif d.kind == "twist":
                M = twist(self.module(d.parts[0]), d.offset, name)
            else:
                S = self.scheme(d.scheme, d.level)
                P = S.poset
                zero = (0,) * S.rank
                shifts = {}
                for i in P.elements:
                    got = d.shifts.get(i)
                    shifts[i] = got[0] if got else [zero] * d.rank
                for key in d.psi:
                    if key not in P.relations():
                        raise WorkspaceError([(d.psi[key][1], "psi %s %s: not a relation of the poset" % key)])
                gl = {}
                for (i, j) in P.relations():
                    if (i, j) in d.psi:
                        gl[(i, j)] = d.psi[(i, j)][0]
                    else:
                        gl[(i, j)] = [["1" if a == b else "0" for b in range(d.rank)] for a in range(d.rank)]
                M = LocallyFreeModule(name, S, d.rank, shifts, gl)
        except WorkspaceError:
            raise
        except (ValueError, RewriteError, KeyError) as e:
            raise WorkspaceError([(d.line, "module %s: %s" % (name, e))]) from None
        self._built[name] = M
        return M

    def complex(self, name: str) -> ModuleComplex:
        d = self.complexes[name]
        terms = {q: self.module(m) for q, (m, _) in d.terms.items()}
        maps = {}
        try:
            for q, comps in d.maps.items():
                if q not in terms or q + 1 not in terms:
                    raise WorkspaceError([(d.line, "complex %s: map %d needs terms %d and %d" % (name, q, q, q + 1))])
                src, tgt = terms[q], terms[q + 1]
                full = {}
                for i in src.scheme.poset.elements:
                    if i not in comps:
                        raise WorkspaceError([(d.line, "complex %s: map %d has no component at chart %s"
                                               % (name, q, i))])
                    full[i] = comps[i][0]
                maps[q] = ModuleMap(src, tgt, full)
            return ModuleComplex(name, terms, maps)
        except WorkspaceError:
            raise
        except (ValueError, RewriteError) as e:
            raise WorkspaceError([(d.line, "complex %s: %s" % (name, e))]) from None

    def object(self, text: str) -> ModuleComplex:
        """A test object: complex name, module name, ``A + B`` or ``X[k]``."""
        text = text.strip()
        m = re.fullmatch(r"(.+)\[(-?\d+)\]", text)
        if m:
            return self.object(m.group(1)).shift(int(m.group(2)), name=text)
        if text in self.complexes:
            return self.complex(text)
        if text in self.modules:
            return ModuleComplex.single(self.module(text))
        parts = [p.strip() for p in text.split("+")]
        if len(parts) > 1 and all(p in self.modules for p in parts):
            return ModuleComplex.single(direct_sum([self.module(p) for p in parts], text))
        raise WorkspaceError([(0, "unknown module or complex %r" % text)])

    def tower(self, name: str) -> DeformationTower:
        d = self.towers.get(name)
        if d is None:
            raise WorkspaceError([(0, "unknown tower %r" % name)])
        return DeformationTower.from_spec(self.specs[d.scheme], d.levels, d.overrides, name)


def parse(path: str) -> Workspace:
    return Workspace.load(path)


def module_to_text(M: LocallyFreeModule, scheme_name: str, name: str | None = None) -> str:
    """Serialize a module (e.g. an extension certificate) as a re-ingestable module block."""
    S = M.scheme
    lines = ["module %s on %s level %d" % (name or M.name, scheme_name, S.ring.order), "  rank %d" % M.rank]
    for i in S.poset.elements:
        lines.append("  shift %s %s" % (i, " ".join(",".join(str(x) for x in w) for w in M.shifts[i])))
    for (i, j), mat in sorted(M.gluings.items(), key=lambda kv: (S.poset.position(kv[0][0]), S.poset.position(kv[0][1]))):
        A = S.algebras[i]
        rows = ", ".join("[" + ", ".join(A.format(e) for e in row) + "]" for row in mat)
        lines.append("  psi %s %s [%s]" % (i, j, rows))
    lines.append("end")
    return "\n".join(lines) + "\n"

"""Weight-homogeneous noncommutative rewriting over k[t]/(t^n).

Internally a word is a ``str`` with one character per letter, the character
codes increasing with the declared letter order, so Python string comparison
is the lexicographic part of the deg-lex order.  A formal combination is a
``dict`` mapping ``(word, j)`` to a nonzero field coefficient of ``t^j * word``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
import heapq
import re

from .coeff import ArtinRing, Weight, wadd, wscale, format_weight

_BASE = 0x100
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*$")


class ReductionBudgetExceeded(RuntimeError):
    pass


class RewriteError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    letters: tuple
    weights: tuple  # one Weight per letter

    def __post_init__(self):
        if len(set(self.letters)) != len(self.letters):
            raise RewriteError("letter names must be unique")
        if len(self.letters) != len(self.weights):
            raise RewriteError("one weight per letter")
        for name in self.letters:
            if not _NAME.match(name) or name == "t":
                raise RewriteError("bad letter name %r" % name)
        ranks = {len(w) for w in self.weights}
        if len(ranks) > 1:
            raise RewriteError("all letter weights need the same number of components")

    @classmethod
    def from_pairs(cls, pairs) -> "Alphabet":
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(tuple(p[1]) for p in pairs))

    def char(self, name: str) -> str:
        try:
            return chr(_BASE + self.letters.index(name))
        except ValueError:
            raise RewriteError("unknown letter %r" % name) from None

    def name(self, ch: str) -> str:
        return self.letters[ord(ch) - _BASE]

    def weight(self, word: str, rank: int) -> Weight:
        w = (0,) * rank
        for ch in word:
            w = wadd(w, self.weights[ord(ch) - _BASE])
        return w

    def format_word(self, word: str) -> str:
        if not word:
            return "1"
        parts = []
        i = 0
        while i < len(word):
            j = i
            while j < len(word) and word[j] == word[i]:
                j += 1
            name = self.name(word[i])
            parts.append(name if j - i == 1 else "%s^%d" % (name, j - i))
            i = j
        return "*".join(parts)


def deglex_key(word: str):
    return (len(word), word)


def parse_combination(text: str, alpha: Alphabet, ring: ArtinRing) -> dict:
    """Parse ``"x*s + 2*t*x - 1/2*z^3"`` into a combination dict (not normalized)."""
    field = ring.field
    s = text.replace(" ", "")
    if not s:
        raise RewriteError("empty expression")
    out = {}
    terms = re.findall(r"([+-]?)([^+-]+)", s)
    if "".join(a + b for a, b in terms) != s:
        raise RewriteError("cannot parse expression %r" % text)
    for sign, body in terms:
        coeff = field.one
        word = ""
        j = 0
        for factor in body.split("*"):
            if not factor:
                raise RewriteError("empty factor in %r" % text)
            base, _, exp = factor.partition("^")
            k = int(exp) if exp else 1
            if k < 0:
                raise RewriteError("negative exponent in %r" % text)
            if re.fullmatch(r"\d+(/\d+)?", base):
                for _ in range(k):
                    coeff = coeff * field.parse(base)
            elif base == "t":
                j += k
            else:
                word += alpha.char(base) * k
        if sign == "-":
            coeff = -coeff
        if j >= ring.order or not coeff:
            continue
        key = (word, j)
        c = out.get(key, field.zero) + coeff
        if c:
            out[key] = c
        else:
            out.pop(key, None)
    return out


def format_combination(expr: dict, alpha: Alphabet, ring: ArtinRing) -> str:
    if not expr:
        return "0"
    fmt = ring.field.format
    items = sorted(expr.items(), key=lambda kv: (kv[0][1], -len(kv[0][0]), [-ord(c) for c in kv[0][0]]))
    out = []
    for (word, j), c in items:
        factors = []
        if j:
            factors.append("t" if j == 1 else "t^%d" % j)
        if word:
            factors.append(alpha.format_word(word))
        cs = fmt(c)
        neg = cs.startswith("-")
        if neg:
            cs = cs[1:]
        if cs != "1" or not factors:
            factors.insert(0, cs)
        body = "*".join(factors)
        if not out:
            out.append("-" + body if neg else body)
        else:
            out.append(("- " if neg else "+ ") + body)
    return " ".join(out)


@dataclass(frozen=True)
class RewriteRule:
    lhs: str
    rhs: tuple  # sorted tuple of ((word, j), coeff)

    @classmethod
    def make(cls, lhs: str, rhs: dict) -> "RewriteRule":
        return cls(lhs, tuple(sorted(rhs.items(), key=lambda kv: (deglex_key(kv[0][0]), kv[0][1]))))

    def rhs_dict(self) -> dict:
        return dict(self.rhs)


@dataclass
class Ambiguity:
    word: str
    rules: tuple  # indices of the two overlapping rules
    left: dict
    right: dict


@dataclass
class ConfluenceReport:
    checked: int
    unresolved: list = dc_field(default_factory=list)

    @property
    def confluent(self) -> bool:
        return not self.unresolved


class RewriteSystem:
    """An inter-reduced, weight-homogeneous rewriting system over ``ring``."""

    def __init__(self, alphabet: Alphabet, rules, ring: ArtinRing, step_budget: int = 200000):
        self.alphabet = alphabet
        self.ring = ring
        self.step_budget = step_budget
        self.rank = len(ring.t_weight)
        if alphabet.weights and len(alphabet.weights[0]) != self.rank:
            raise RewriteError("letter weights and weight of t have different numbers of components")
        cleaned = []
        for r in rules:
            rhs = {(w, j): c for (w, j), c in r.rhs if j < ring.order and c}
            cleaned.append(RewriteRule.make(r.lhs, rhs))
        self.rules = tuple(cleaned)
        self._validate()
        self._by_len = {}
        for r in self.rules:
            self._by_len.setdefault(len(r.lhs), set()).add(r.lhs)
        self._rule_of = {r.lhs: r for r in self.rules}

    def _validate(self):
        seen = set()
        for r in self.rules:
            if not r.lhs:
                raise RewriteError("empty left-hand side")
            if r.lhs in seen:
                raise RewriteError("duplicate left-hand side %s" % self.alphabet.format_word(r.lhs))
            seen.add(r.lhs)
            lw = self.weight(r.lhs)
            for (w, j), _ in r.rhs:
                tw = wadd(self.weight(w), wscale(j, self.ring.t_weight))
                if tw != lw:
                    raise RewriteError(
                        "rule %s is not homogeneous: lhs weight %s, rhs term %s has weight %s"
                        % (self.format_rule(r), format_weight(lw),
                           format_combination({(w, j): self.ring.field.one}, self.alphabet, self.ring),
                           format_weight(tw)))
                if deglex_key(w) >= deglex_key(r.lhs):
                    raise RewriteError("rule %s: rhs word %s is not smaller than the lhs"
                                       % (self.format_rule(r), self.alphabet.format_word(w)))
        for a in self.rules:
            for b in self.rules:
                if a is not b and b.lhs in a.lhs:
                    raise RewriteError("rules are not inter-reduced: %s contains %s"
                                       % (self.alphabet.format_word(a.lhs), self.alphabet.format_word(b.lhs)))

    # -- basic helpers -------------------------------------------------------

    def weight(self, word: str) -> Weight:
        return self.alphabet.weight(word, self.rank)

    def term_weight(self, word: str, j: int) -> Weight:
        return wadd(self.weight(word), wscale(j, self.ring.t_weight))

    def format_rule(self, r: RewriteRule) -> str:
        return "%s -> %s" % (self.alphabet.format_word(r.lhs),
                             format_combination(r.rhs_dict(), self.alphabet, self.ring))

    def parse(self, text: str) -> dict:
        return self.normal_form(parse_combination(text, self.alphabet, self.ring))

    def format(self, expr: dict) -> str:
        return format_combination(expr, self.alphabet, self.ring)

    def truncate(self, order: int) -> "RewriteSystem":
        """The same presentation over k[t]/(t^order), for ``order`` at most the current one."""
        if order > self.ring.order:
            raise RewriteError("cannot raise the nilpotency order of a presentation (t-terms were truncated)")
        return RewriteSystem(self.alphabet, self.rules, self.ring.with_order(order), self.step_budget)

    def find_redex(self, word: str):
        best = None
        for r in self.rules:
            p = word.find(r.lhs)
            if p >= 0 and (best is None or p < best[0]):
                best = (p, r)
        return best

    def is_normal(self, word: str) -> bool:
        return self.find_redex(word) is None

    # -- reduction -----------------------------------------------------------

    def normal_form(self, expr: dict) -> dict:
        n = self.ring.order
        todo = {}
        heap = []
        for (w, j), c in expr.items():
            if j >= n or not c:
                continue
            slot = todo.get(w)
            if slot is None:
                slot = todo[w] = {}
                heapq.heappush(heap, (-len(w), [-ord(ch) for ch in w], w))
            slot[j] = slot[j] + c if j in slot else c
        out = {}
        steps = 0
        while heap:
            _, _, w = heapq.heappop(heap)
            coeffs = todo.pop(w)
            coeffs = {j: c for j, c in coeffs.items() if c}
            if not coeffs:
                continue
            hit = self.find_redex(w)
            if hit is None:
                for j, c in coeffs.items():
                    out[(w, j)] = c
                continue
            steps += 1
            if steps > self.step_budget:
                raise ReductionBudgetExceeded("more than %d reduction steps" % self.step_budget)
            pos, rule = hit
            pre, post = w[:pos], w[pos + len(rule.lhs):]
            for (rw, rj), rc in rule.rhs:
                nw = pre + rw + post
                slot = todo.get(nw)
                for j, c in coeffs.items():
                    jj = j + rj
                    if jj >= n:
                        continue
                    if slot is None:
                        slot = todo[nw] = {}
                        heapq.heappush(heap, (-len(nw), [-ord(ch) for ch in nw], nw))
                    slot[jj] = slot[jj] + c * rc if jj in slot else c * rc
        return out

    # -- confluence ----------------------------------------------------------

    def overlaps(self):
        """All overlap ambiguities ``(word, i, j, k)``: suffix of rule i of length k = prefix of rule j."""
        out = []
        for a, ra in enumerate(self.rules):
            for b, rb in enumerate(self.rules):
                for k in range(1, min(len(ra.lhs), len(rb.lhs))):
                    if ra.lhs[-k:] == rb.lhs[:k]:
                        out.append((ra.lhs + rb.lhs[k:], a, b, k))
        return out

    def check_local_confluence(self, max_weight: int | None = None) -> ConfluenceReport:
        """Resolve every overlap ambiguity; ``max_weight`` bounds the total weight considered."""
        report = ConfluenceReport(checked=0)
        for word, a, b, k in self.overlaps():
            if max_weight is not None and sum(self.weight(word)) > max_weight:
                continue
            ra, rb = self.rules[a], self.rules[b]
            tail = rb.lhs[k:]
            head = ra.lhs[:-k]
            left = {(w + tail, j): c for (w, j), c in ra.rhs}
            right = {(head + w, j): c for (w, j), c in rb.rhs}
            left = self.normal_form(left)
            right = self.normal_form(right)
            report.checked += 1
            if left != right:
                report.unresolved.append(Ambiguity(word, (a, b), left, right))
        return report

    # -- normal words --------------------------------------------------------

    def enumerate_normal_words(self, weight: Weight, length_cap: int):
        """Normal words of the given weight and length <= cap, in deg-lex order.

        Returns ``(words, cap_hit)``; ``cap_hit`` is set when some normal word of
        this weight has length exactly ``length_cap`` (the list may be incomplete).
        """
        weight = tuple(weight)
        rank = self.rank
        letters = [chr(_BASE + i) for i in range(len(self.alphabet.letters))]
        lw = [self.alphabet.weights[i] for i in range(len(letters))]
        lo = [min([0] + [w[g] for w in lw]) for g in range(rank)]
        hi = [max([0] + [w[g] for w in lw]) for g in range(rank)]
        by_len = self._by_len
        found = []
        cap_hit = False

        def feasible(cur, left):
            for g in range(rank):
                d = weight[g] - cur[g]
                if d < left * lo[g] or d > left * hi[g]:
                    return False
            return True

        def dfs(prefix, cur):
            nonlocal cap_hit
            if cur == weight:
                found.append(prefix)
                if len(prefix) == length_cap:
                    cap_hit = True
            left = length_cap - len(prefix)
            if left == 0:
                return
            for ch, w in zip(letters, lw):
                word = prefix + ch
                bad = False
                for L, lhss in by_len.items():
                    if L <= len(word) and word[-L:] in lhss:
                        bad = True
                        break
                if bad:
                    continue
                nxt = wadd(cur, w)
                if feasible(nxt, left - 1):
                    dfs(word, nxt)

        if feasible((0,) * rank, length_cap):
            dfs("", (0,) * rank)
        found.sort(key=deglex_key)
        return found, cap_hit

"""Finite-depth certificates for branching identities, the congruence-subgroup
witness sequence t_n, and condition (dagger) witnesses for GGS groups.

Every check stores the witness data needed to re-run it (`recheck`), and that
re-run goes through portraits or permutation quotients only, independently of
the word-level construction that produced the witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from . import core
from . import quotients as Q
from . import words as W
from .datum import GroupDatum, classify, is_constant, normalize_family
from .fp import inverse_mod, solve

DEFAULT_DEPTH = 4


class CertifyError(ValueError):
    pass


@dataclass
class Check:
    description: str
    kind: str
    witness: dict
    depth: int
    passed: bool

    def to_json(self) -> dict:
        return {"description": self.description, "kind": self.kind, "witness": self.witness,
                "depth": self.depth, "passed": self.passed}


@dataclass
class Certificate:
    kind: str
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, d: GroupDatum, description: str, kind: str, witness: dict, depth: int) -> Check:
        check = Check(description, kind, witness, depth, VERIFIERS[kind](d, witness, depth))
        self.checks.append(check)
        return check

    def to_json(self) -> dict:
        return {"kind": self.kind, "overall": self.overall, "info": self.info,
                "checks": [c.to_json() for c in self.checks]}


# Verifiers ---------------------------------------------------------------

def _verify_psi1_identity(d: GroupDatum, w: dict, depth: int) -> bool:
    """The element fixes level 1 and its level-1 sections are the listed
    words (identity where unlisted), compared as depth-`depth` portraits."""
    p = d.p
    g = W.portrait(W.parse(d, w["word"]), depth + 1)
    if not core.fixes_level(g, 1):
        return False
    expected = {int(k): v for k, v in w["sections"].items()}
    for x in range(1, p + 1):
        want = W.portrait(W.parse(d, expected.get(x, "1")), depth)
        if core.section(g, (x,)) != want:
            return False
    return True


def _verify_section_shape(d: GroupDatum, w: dict, depth: int) -> bool:
    """h fixes level 1, its section at `trivial` is the identity, and its
    section at `factor_at` is x.factor with x supported on a and one family."""
    h = W.parse(d, w["word"])
    g = W.portrait(h, depth + 1)
    if not core.fixes_level(g, 1) or not core.section(g, (w["trivial"],)).is_identity():
        return False
    x = W.section_split(h).sections[w["factor_at"] - 1] * W.parse(d, w["factor"]).inverse()
    if any(j not in (0, w["family"]) for j, _ in x.syllables):
        return False
    want = W.portrait(x * W.parse(d, w["factor"]), depth)
    return core.section(g, (w["factor_at"],)) == want


def _stab1_generators(q: Q.PermQuotient):
    d = q.datum
    a = q.generator_perms["a"]
    out = []
    for g in d.generators:
        x = q.generator_perms[g]
        for t in range(d.p):
            out.append(Q.perm_conjugate(x, Q.perm_pow(a, t)))
    return out


@lru_cache(maxsize=16)
def _stab1_derived(d: GroupDatum, m: int) -> Q.PermGroup:
    q = Q.build_quotient(d, m)
    return Q.PermGroup(d.p, q.degree, _stab1_generators(q)).derived_subgroup()


def _verify_stab1_derived(d: GroupDatum, w: dict, depth: int) -> bool:
    """The element given by its level-1 sections lies in the derived subgroup
    of the image of Stab_G(1) in G/Stab_G(m)."""
    m = w["level"]
    parts = [core.identity(d.p, m - 1) for _ in range(d.p)]
    for k, word in w["sections"].items():
        parts[int(k) - 1] = W.portrait(W.parse(d, word), m - 1)
    q = Q.build_quotient(d, m)
    return _stab1_derived(d, m).contains(q.image(core.from_sections(parts)))


def _portrait(w: dict, key: str) -> core.Portrait:
    return core.Portrait.from_json(w[key])


def _verify_fixes_level(d: GroupDatum, w: dict, depth: int) -> bool:
    c = W.portrait(W.parse(d, w["c"]), depth)
    t = _portrait(w, "t")
    return core.fixes_level(~c * t, w["level"])


def _verify_recursion_layer(d: GroupDatum, w: dict, depth: int) -> bool:
    """c^-1 t_r = (1, ..., c^-1 t_(r-1), ..., 1) with the entry at `spine`."""
    c_word = W.parse(d, w["c"])
    outer = ~W.portrait(c_word, depth) * _portrait(w, "t")
    inner = ~W.portrait(c_word, depth - 1) * _portrait(w, "t_prev")
    if not core.fixes_level(outer, 1):
        return False
    for x in range(1, d.p + 1):
        s = core.section(outer, (x,))
        if x == w["spine"]:
            if s != inner:
                return False
        elif not s.is_identity():
            return False
    return True


def _quotient_element(d: GroupDatum, w: dict, q: Q.PermQuotient):
    g = q.image(_portrait(w, "t"))
    if w.get("left"):
        g = Q.perm_mul(Q.perm_inv(q.image(W.parse(d, w["left"]))), g)
    return g


def _verify_quotient_member(d: GroupDatum, w: dict, depth: int) -> bool:
    q = Q.build_quotient(d, w["level"])
    return q.contains(_quotient_element(d, w, q))


def _verify_quotient_derived(d: GroupDatum, w: dict, depth: int) -> bool:
    q = Q.build_quotient(d, w["level"])
    return q.in_derived(_quotient_element(d, w, q)) == w["expect"]


def _verify_exponent_nonzero(d: GroupDatum, w: dict, depth: int) -> bool:
    """Some exponent map is nonzero on the word, so it lies outside G'."""
    return not W.in_kernel(W.parse(d, w["word"]))


def _verify_dagger(d: GroupDatum, w: dict, depth: int) -> bool:
    p = d.p
    u_prime = core.parse_address(w["fixed"], p)
    v = core.parse_address(w["moved"], p)
    g = W.portrait(W.parse(d, w["word"]), depth)
    fixes_prefixes = all(core.act(g, u_prime[:k]) == u_prime[:k] for k in range(1, len(u_prime) + 1))
    return fixes_prefixes and core.act(g, v) != v


VERIFIERS = {
    "psi1-identity": _verify_psi1_identity,
    "section-shape": _verify_section_shape,
    "stab1-derived": _verify_stab1_derived,
    "fixes-level": _verify_fixes_level,
    "recursion-layer": _verify_recursion_layer,
    "quotient-member": _verify_quotient_member,
    "quotient-derived": _verify_quotient_derived,
    "exponent-nonzero": _verify_exponent_nonzero,
    "dagger-action": _verify_dagger,
}


def recheck(d: GroupDatum, check: Check | dict) -> bool:
    """Re-run a stored check from its witness alone."""
    if isinstance(check, dict):
        return VERIFIERS[check["kind"]](d, check["witness"], check["depth"])
    return VERIFIERS[check.kind](d, check.witness, check.depth)


def recheck_certificate(d: GroupDatum, cert: Certificate | dict) -> bool:
    checks = cert["checks"] if isinstance(cert, dict) else cert.checks
    return all(recheck(d, c) for c in checks)


# Word helpers -------------------------------------------------------------

def _a(d: GroupDatum, k: int = 1) -> W.ReducedWord:
    return W.gen(d, "a", k % d.p)


def _conj_a(w: W.ReducedWord, t: int) -> W.ReducedWord:
    """w^(a^t)."""
    return W.conjugate(w, _a(w.datum, t))


def _name(g) -> str:
    return core.generator_name(g)


def _translate(w: W.ReducedWord, d: GroupDatum, j: int, coeffs) -> W.ReducedWord:
    """Rewrite a word over a datum whose family j was re-based into the
    original datum d; coeffs[i] expresses new vector i in the old basis."""
    p = d.p
    out = []
    for fam, beta in w.syllables:
        if fam == j:
            new = [0] * d.ranks[j - 1]
            for i, k in enumerate(beta):
                for t, c in enumerate(coeffs[i]):
                    new[t] = (new[t] + k * c) % p
            beta = tuple(new)
        out.append((fam, beta))
    return W.ReducedWord(d, out)


def _rebase(d: GroupDatum, j: int):
    """Normalized datum for family j plus the coefficients tying it back."""
    dn = normalize_family(d, j)
    coeffs = []
    for v in dn.family(j):
        c = solve(d.family(j), v, d.p)
        if c is None:
            raise CertifyError(f"family {j}: normalized vector {v} is outside the original span")
        coeffs.append(c)
    return dn, coeffs


def _power_to_a(d: GroupDatum, w: W.ReducedWord, coord: int) -> W.ReducedWord | None:
    """A power of w whose section at `coord` is exactly a, if that section is
    a nontrivial power of a."""
    s = W.section_split(w).sections[coord - 1]
    if W.length(s) or not W.epsilon_a(s):
        return None
    return w ** inverse_mod(W.epsilon_a(s), d.p)


# Branching over gamma_3 ---------------------------------------------------

def _identity_witness(w: W.ReducedWord, first: W.ReducedWord) -> dict:
    return {"word": str(w), "sections": {"1": str(first)}}


def _lift_to_first(d: GroupDatum, g) -> W.ReducedWord:
    """c^(a^j) for c in family j: places c at coordinate 1."""
    return _conj_a(W.gen(d, g), g[0])


def _element_with_a_first(d: GroupDatum) -> W.ReducedWord:
    for g in d.generators:
        for t in range(d.p):
            w = _power_to_a(d, _conj_a(W.gen(d, g), t), 1)
            if w is not None:
                return w
    raise CertifyError("no conjugate of a directed generator has a nontrivial a-power at coordinate 1")


def _ratio_indices(e, p: int):
    """Every m in 2..p-2 (1-based) with e_(m-1) e_(m+1) != e_m^2 mod p."""
    for m in range(2, len(e)):
        if (e[m - 2] * e[m] - e[m - 1] ** 2) % p:
            yield m


def _gamma3_first_entry_witnesses(d: GroupDatum, k: int, l: int, cert: Certificate, depth: int) -> None:
    """Checks realizing ([a, c_k, x c_l], 1, ..., 1) with x in <a, family k>."""
    p = d.p
    dn, coeffs = _rebase(d, k)
    r = dn.ranks[k - 1]
    E = dn.family(k)

    def back(w: W.ReducedWord) -> W.ReducedWord:
        return _translate(w, d, k, coeffs)

    def b(i):
        return W.gen(dn, (k, i))

    def h_from(g_first: W.ReducedWord, j: int) -> W.ReducedWord:
        s = dn.vector(l, j)[p - 2]
        return (g_first ** (-s % p)) * _conj_a(W.gen(dn, (l, j)), l)

    def emit(i: int, j: int, h: W.ReducedWord, route: str, first=None) -> None:
        cl = W.gen(dn, (l, j))
        first = b(i) if first is None else first
        wit = W.commutator(_conj_a(first, k - 1), _conj_a(b(i), k), h)
        hx = W.section_split(h).sections[0]
        target = W.commutator(_a(dn), b(i), hx)
        if h != _conj_a(cl, l):
            cert.add(d, f"{route}: h at coordinate {p} is trivial, at coordinate 1 is x.{_name((l, j))}",
                     "section-shape",
                     {"word": str(back(h)), "trivial": p, "factor_at": 1,
                      "factor": _name((l, j)), "family": k}, depth)
        cert.add(d, f"{route}: ([a, c_k, x c_l], 1, ..., 1) for c_k = normalized b{k}_{i}, c_l = {_name((l, j))}",
                 "psi1-identity", _identity_witness(back(wit), back(target)), depth)

    for j in range(1, d.ranks[l - 1] + 1):
        if r == 1:
            h = h_from(_conj_a(b(1), k - 2), j)
            emit(1, j, h, "case 1")
        elif (r, p) == (2, 3):
            emit(1, j, _conj_a(W.gen(dn, (l, j)), l), "case 3")
            emit(2, j, h_from(_conj_a(b(1), k - 2), j), "case 3", first=b(1))
        else:
            for i in range(1, r + 1):
                e = E[i - 1]
                g_i = None
                for m in _ratio_indices(e, p):
                    g_im = (_conj_a(b(i), k - m) ** e[m - 1]) * (_conj_a(b(i), k - m - 1) ** (-e[m - 2] % p))
                    g_i = _power_to_a(dn, g_im, 1)
                    if g_i is not None:
                        route = f"case 2 (m={m})"
                        break
                if g_i is None:
                    if r != 2:
                        raise CertifyError(f"family {k}: vector {e} has no ratio break and r = {r}")
                    unit = (1,) + (0,) * (p - 2)
                    if E[0] != unit or E[1] != unit[:-1] + (1,):
                        raise CertifyError(f"family {k}: vectors {E} lack a ratio break but are not in the "
                                           f"exceptional standard shape (1,0,...,0), (1,0,...,0,1)")
                    g_i = _conj_a(b(2), k + 1)
                    route = "case 2 exceptional"
                    if i == 1:
                        emit(1, j, _conj_a(W.gen(dn, (l, j)), l), route + " direct")
                emit(i, j, h_from(_conj_a(g_i, -1), j), route)


def gamma3_branch_certificate(d: GroupDatum, depth: int = DEFAULT_DEPTH) -> Certificate:
    if depth < 3:
        raise CertifyError("depth must be at least 3")
    if not classify(d).in_C_reg:
        raise CertifyError("every non-empty family needs a non-constant defining vector")
    fams = d.nonempty_families
    cert = Certificate("gamma3-branch", info={"depth": depth, "family_pairs": len(fams) * (len(fams) - 1)})
    d_elem = _element_with_a_first(d) if len(fams) > 1 else None
    for k in fams:
        for l in fams:
            if k == l:
                continue
            for ck in [g for g in d.generators if g[0] == k]:
                for cl in [g for g in d.generators if g[0] == l]:
                    inner = W.commutator(_lift_to_first(d, ck), _lift_to_first(d, cl))
                    pair = W.commutator(W.gen(d, ck), W.gen(d, cl))
                    for cm in d.generators:
                        cert.add(d, f"([{_name(ck)}, {_name(cl)}, {_name(cm)}], 1, ..., 1)", "psi1-identity",
                                 _identity_witness(W.commutator(inner, _lift_to_first(d, cm)),
                                                   W.commutator(pair, W.gen(d, cm))), depth)
                    cert.add(d, f"([{_name(ck)}, {_name(cl)}, a], 1, ..., 1)", "psi1-identity",
                             _identity_witness(W.commutator(inner, d_elem), W.commutator(pair, _a(d))), depth)
            _gamma3_first_entry_witnesses(d, k, l, cert, depth)
    for c in cert.checks:
        if c.kind == "psi1-identity":
            w = W.parse(d, c.witness["word"])
            if not W.in_kernel(w) or not core.fixes_level(W.portrait(w, 1), 1):
                c.passed = False
    return cert


# Branching over G' --------------------------------------------------------

def derived_branch_certificate(d: GroupDatum, depth: int = DEFAULT_DEPTH) -> Certificate:
    if not classify(d).condition_i_nonsymmetric:
        raise CertifyError("every non-empty family needs a non-symmetric defining vector")
    cert = Certificate("derived-branch", info={"depth": depth})
    for ck in d.generators:
        for cl in d.generators:
            if ck[0] == cl[0]:
                continue
            w = W.commutator(_lift_to_first(d, ck), _lift_to_first(d, cl))
            cert.add(d, f"([{_name(ck)}, {_name(cl)}], 1, ..., 1)", "psi1-identity",
                     _identity_witness(w, W.commutator(W.gen(d, ck), W.gen(d, cl))), depth)
    for g in d.generators:
        target = W.commutator(_a(d), W.gen(d, g))
        cert.add(d, f"([a, {_name(g)}], 1, ..., 1) lies in Stab(1)' modulo Stab({depth})", "stab1-derived",
                 {"sections": {"1": str(target)}, "level": depth}, depth)
    return cert


# Congruence subgroup witness ------------------------------------------------

@dataclass(frozen=True)
class CspWitness:
    n: int
    t_n: core.Portrait
    pair: tuple

    def to_json(self) -> dict:
        return {"n": self.n, "t_n": self.t_n.to_json(),
                "pair": {"b": _name(self.pair[0]), "c": _name(self.pair[1])}}


def shared_pair(d: GroupDatum):
    """Generators b, c in families i < j with the same defining vector."""
    for b in d.generators:
        for c in d.generators:
            if b[0] < c[0] and d.vector(*b) == d.vector(*c):
                return b, c
    return None


def t_sequence(d: GroupDatum, b, c, n: int, depth: int) -> list[core.Portrait]:
    """[t_1, ..., t_n] with t_r a portrait of depth depth - n + r."""
    p = d.p
    j = c[0]
    spine = d.spine(j)
    lay = d.layout(j, d.vector(*c))
    out = [W.portrait(W.gen(d, b), depth - n + 1)]
    for r in range(2, n + 1):
        sub = depth - n + r - 1
        parts = [out[-1] if x == spine else core.rooted(p, sub, lay[x - 1]) for x in range(1, p + 1)]
        out.append(core.from_sections(parts))
    return out


def csp_witness(d: GroupDatum, n: int, m: int) -> tuple[CspWitness, Certificate]:
    cl = classify(d)
    if not (cl.condition_ii_shared_vector and cl.condition_i_nonsymmetric):
        raise CertifyError("needs a defining vector shared by two families and non-symmetric vectors in every family")
    if n < 1 or m <= n:
        raise CertifyError(f"need 1 <= n < m, got n={n}, m={m}")
    b, c = shared_pair(d)
    ts = t_sequence(d, b, c, n, m)
    cert = Certificate("csp-witness", info={"n": n, "quotient_level": m, "b": _name(b), "c": _name(c)})
    cname = _name(c)
    t_json = ts[-1].to_json()
    cert.add(d, f"c^-1 t_{n} fixes level {n}", "fixes-level",
             {"c": cname, "t": t_json, "level": n}, m)
    for r in range(2, n + 1):
        cert.add(d, f"c^-1 t_{r} = (1, ..., c^-1 t_{r - 1}, ..., 1)", "recursion-layer",
                 {"c": cname, "t": ts[r - 1].to_json(), "t_prev": ts[r - 2].to_json(), "spine": d.spine(c[0])},
                 m - n + r)
    cert.add(d, f"t_{n} lies in G modulo Stab({m})", "quotient-member", {"t": t_json, "level": m}, m)
    cert.add(d, f"b^-1 t_{n} lies in G' modulo Stab({m})", "quotient-derived",
             {"t": t_json, "left": _name(b), "level": m, "expect": True}, m)
    cb = W.gen(d, c).inverse() * W.gen(d, b)
    cert.add(d, "c^-1 b lies outside G' (nonzero exponent map)", "exponent-nonzero", {"word": str(cb)}, 0)
    q = Q.build_quotient(d, m)
    shadow = q.in_derived(Q.perm_mul(Q.perm_inv(q.image(W.gen(d, c))), q.image(ts[-1])))
    cert.info["c^-1 t_n in G' Stab(m)"] = shadow
    return CspWitness(n, ts[-1], (b, c)), cert


# Condition (dagger) -------------------------------------------------------

def _ggs_vector(d: GroupDatum):
    if d.generators != ((1, 1),):
        raise CertifyError("expects a GGS datum: a single directed generator in family 1")
    return d.vector(1, 1)


def _first_level_dagger(d: GroupDatum, i: int, j: int) -> tuple[W.ReducedWord, str]:
    """Element of Stab(1) with trivial section at j and a section at i that
    acts nontrivially on level 1; requires i < j."""
    p = d.p
    e = _ggs_vector(d)
    k = inverse_mod(e[0], p)
    e = [k * x % p for x in e]
    B = W.gen(d, (1, 1), k)
    m = e[1]
    if all(e[t] == pow(m, t, p) for t in range(p - 1)):
        base = B * _conj_a(B ** (-m % p), 1)
        if (i, j) == (1, p):
            return _conj_a(base, 1), "case 1 (i, j) = (1, p)"
        return _conj_a(base, i - 1), "case 1"
    ratios = [e[t] * inverse_mod(e[t - 1], p) % p for t in range(1, p - 1)]
    kk = next(t for t in range(2, p - 1) if ratios[t - 1] != ratios[t - 2])
    g_k = (_conj_a(B, p - kk + 1) ** e[kk - 1]) * (_conj_a(B, p - kk) ** (-e[kk - 2] % p))

    def eps(w, x):
        return W.epsilon_a(W.section_split(w).sections[x - 1])

    h = next((_conj_a(g_k, t) for t in range(p) if not eps(_conj_a(g_k, t), j)), None)
    if h is None:
        raise CertifyError(f"no a-conjugate of g_{kk} has an a-free entry at {j}")
    step = j - i
    for s in range(p):
        g = _conj_a(h, s * step)
        if not eps(g, j) and eps(g, i) and W.is_identity(W.section_split(g).sections[j - 1]):
            return g, f"case 2 (k={kk}, conjugate {s})"
    raise CertifyError(f"conjugate search for (i, j) = ({i}, {j}) exhausted {p} steps")


def _lift(d: GroupDatum, w: W.ReducedWord, x: int) -> W.ReducedWord:
    """An element of Stab(1) whose section at x is w."""
    p = d.p
    lb = _conj_a(W.gen(d, (1, 1)), x)
    la = _power_to_a(d, _conj_a(W.gen(d, (1, 1)), x - 1), x)
    if la is None:
        raise CertifyError(f"cannot lift a to coordinate {x}")
    out = W.empty(d)
    for j, beta in w.syllables:
        out = out * ((la if j == 0 else lb) ** (beta[0] % p))
    return out


@lru_cache(maxsize=None)
def dagger_element(d: GroupDatum, u: tuple, u_prime: tuple) -> tuple[W.ReducedWord, str]:
    """g fixing u' (hence all its prefixes) and moving every vertex strictly below u."""
    p = d.p
    if u[0] == u_prime[0]:
        inner, route = dagger_element(d, u[1:], u_prime[1:])
        return _lift(d, inner, u[0]), route + f"; lifted through {u[0]}"
    i, j = u[0], u_prime[0]
    t = 0
    if i > j:
        t = (1 - i) % p
        i, j = 1, (j + t - 1) % p + 1
    g, route = _first_level_dagger(d, i, j)
    if t:
        g = _conj_a(g, -t)
        route += f"; conjugated by a^{t}"
    return g, route


def _check_dagger_input(d: GroupDatum, u, u_prime, v) -> None:
    e = _ggs_vector(d)
    if d.p < 5:
        raise CertifyError("needs p >= 5")
    if is_constant(e) or not all(e):
        raise CertifyError("defining vector must be non-constant with all entries non-zero")
    if not u or not u_prime or u_prime[:len(u)] == u or u[:len(u_prime)] == u_prime:
        raise CertifyError("u and u' must be incomparable")
    if len(v) <= len(u) or v[:len(u)] != u:
        raise CertifyError("v must lie strictly below u")


def dagger_witness(d: GroupDatum, u, u_prime, v) -> tuple[W.ReducedWord, Certificate]:
    p = d.p
    u, u_prime, v = (core.parse_address(x, p) if isinstance(x, str) else tuple(x) for x in (u, u_prime, v))
    _check_dagger_input(d, u, u_prime, v)
    g, route = dagger_element(d, u, u_prime)
    fmt = core.format_address
    cert = Certificate("dagger-witness", info={"route": route, "u": fmt(u, p), "u_prime": fmt(u_prime, p),
                                               "v": fmt(v, p)})
    cert.add(d, f"g fixes {fmt(u_prime, p)} and its prefixes, moves {fmt(v, p)}", "dagger-action",
             {"word": str(g), "fixed": fmt(u_prime, p), "moved": fmt(v, p)}, max(len(u_prime), len(v)))
    return g, cert


__all__ = [
    "Certificate", "Check", "CertifyError", "CspWitness", "csp_witness", "dagger_element",
    "dagger_witness", "derived_branch_certificate", "gamma3_branch_certificate", "recheck",
    "recheck_certificate", "shared_pair", "t_sequence",
]

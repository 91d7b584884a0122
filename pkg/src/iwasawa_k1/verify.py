"""Congruence conditions on tuples and the diagram harness."""

from __future__ import annotations

import numpy as np

from .algebra import (AbelianElement, AdditiveTuple, AlgebraContext, ComponentTuple,
                      ConjClassElement, GroupRingElement, UnitTuple, beta, delta_section,
                      pr_cyc, sigma_membership)
from .errors import PreconditionError, ToolkitError
from .kone import nu_VU, random_unit, theta
from .logmap import (LogContext, alpha_U, integral_log_L, lg_identity_rhs, log_unit, omega,
                     script_L, _phi_minus)


class Report:
    def __init__(self, kind, level, precision):
        self.kind = kind
        self.level = level
        self.precision = precision
        self.entries = []

    def add(self, condition, subgroups, ok, certified=None, witness=None, residual=None, note=None):
        entry = {"condition": condition, "subgroups": list(subgroups),
                 "status": "pass" if ok else "fail"}
        if certified is not None:
            entry["certified_precision"] = int(certified)
        if witness is not None:
            entry["witness"] = witness
        if residual is not None:
            entry["residual"] = residual
        if note:
            entry["note"] = note
        self.entries.append(entry)
        return ok

    @property
    def passed(self):
        return all(e["status"] == "pass" for e in self.entries)

    def failures(self):
        return [e for e in self.entries if e["status"] == "fail"]

    @property
    def certified_precision(self):
        vals = [e["certified_precision"] for e in self.entries if "certified_precision" in e]
        return min(vals) if vals else self.precision

    def to_json(self):
        return {"kind": self.kind, "level": self.level, "precision": self.precision,
                "verdict": "pass" if self.passed else "fail",
                "certified_precision": int(self.certified_precision),
                "entries": self.entries}


def _residual(diff: AbelianElement):
    v = diff.value
    if v.laurent:
        return {"lo": int(v.lo), "data": v.trim().data.tolist()}
    return {"data": v.reduce().data.tolist(), "scale": int(v.scale)}


def _equal(a, b):
    """(equal?, certified digits, residual)."""
    d = a.value - b.value
    ok = d.is_zero()
    return ok, d.certified, None if ok else _residual(a._new(d))


def _pairs_with_commutator(ctx):
    for V in ctx.subgroups:
        comm = set(V.commutator_r.tolist())
        for U in ctx.subgroups:
            if U is not V and U.r_set <= V.r_set and comm <= U.r_set:
                yield U, V


def _index_p_pairs(ctx):
    p = ctx.p
    for V in ctx.subgroups:
        for U in ctx.subgroups:
            if U.r_set <= V.r_set and len(V.r) == p * len(U.r):
                yield U, V


def check_A(t: AdditiveTuple) -> Report:
    ctx = t.ctx
    rep = Report("psi", ctx.n, None)
    for U, V in _pairs_with_commutator(ctx):
        lhs = ctx.tau_map(U, V)(t[V].value)
        rhs = ctx.pi_map(U, V)(t[U].value)
        alg = ctx.section_algebra(U, V)
        ok, cert, res = _equal(AbelianElement(ctx, alg, lhs), AbelianElement(ctx, alg, rhs))
        rep.add("A1", [U.label, V.label], ok, cert, residual=res)
    _check_conj(ctx, t, rep, "A2")
    for U in ctx.subgroups:
        m = sigma_membership(t[U], U)
        rep.add("A3", [U.label], m.member, m.precision,
                witness=m.to_json().get("witness"), note=m.reason)
    return rep


def _check_conj(ctx, t, rep, name):
    for U in ctx.subgroups:
        seen = set()
        for g in range(ctx.group.nr):
            W, cmap = ctx.conj_map(g, U)
            img = cmap(t[U].value)
            key = (W.position, img.reduce().data.tobytes())
            if key in seen:
                continue
            seen.add(key)
            ok, cert, res = _equal(t[W], t[W]._new(img))
            if not ok:
                rep.add(name, [U.label, W.label], False, cert, residual=res, note=f"g = R-index {g}")
                break
        else:
            rep.add(name, [U.label], True)


def check_M(t: UnitTuple) -> Report:
    """(M1)-(M4) and (M3a).  A component that breaks a computation (for
    instance a non-unit where a unit is required) fails that condition."""
    ctx = t.ctx
    rep = Report("phi", ctx.n, None)
    for name, step in (("M1", _m1), ("M2", lambda t, rep: _check_conj(ctx, t, rep, "M2")),
                       ("M3", _m3), ("M3a", _m3a), ("M4", _m4)):
        try:
            step(t, rep)
        except PreconditionError as exc:
            rep.add(name, [], False, note=f"{type(exc).__name__}: {exc}")
    return rep


def _m1(t, rep):
    ctx = t.ctx
    for U, V in _pairs_with_commutator(ctx):
        lhs = nu_VU(ctx, V, U, t[V])
        rhs = lhs._new(ctx.pi_map(U, V)(t[U].value))
        ok, cert, res = _equal(lhs, rhs)
        rep.add("M1", [U.label, V.label], ok, cert, residual=res,
                note="abelian V: this is (M1a)" if V.is_abelian else None)


def _m3(t, rep):
    ctx = t.ctx
    for U, V in _index_p_pairs(ctx):
        diff = t[U]._new(ctx.ver_map(V, U)(t[V].value) - t[U].value)
        m = sigma_membership(diff, U, V)
        rep.add("M3", [U.label, V.label], m.member, m.precision,
                witness=m.to_json().get("witness"), note=m.reason)


def _m3a(t, rep):
    ctx = t.ctx
    z = ctx.lattice.z
    for U in ctx.subgroups:
        xu = t[U]
        lhs = xu.alg.power(xu.value, len(U.r))
        d = lhs - ctx.embed_map(z, U)(t[z].value)
        ok1 = _divisible_by_p(d)
        d2 = ctx.ver_map(U, z)(xu.value) - t[z].value
        ok2 = _divisible_by_p(d2)
        rep.add("M3a", [U.label], ok1 and ok2, min(d.certified, d2.certified))


def _m4(t, rep):
    ctx = t.ctx
    for V in ctx.lattice.cyclic:
        av = alpha_U(t[V], V)
        prod = av.alg.one(av.value.ring)
        for W in ctx.lattice.P_c(V):
            aw = alpha_U(t[W], W)
            prod = av.alg.mul(prod, ctx.phi_ab_map(W, target=V)(aw.value))
        diff = av._new(av.value - prod)
        m = sigma_membership(diff, V, None, p_power=1)
        rep.add("M4", [V.label], m.member, m.precision,
                witness=m.to_json().get("witness"), note=m.reason)


def _divisible_by_p(d):
    dd = d.trim() if d.laurent else d
    return not np.any(dd.integral().data % d.ring.p)


# -- diagram harness --------------------------------------------------------------

def random_class_element(ctx, ring, rng, digits=None):
    cm = ctx.classes()
    pd = ring.p ** (ring.K if digits is None else digits)
    data = rng.integers(0, pd, size=(cm.size, ring.pn))
    return ConjClassElement(ctx, ring.wrap(data))


def diagram_harness(ctx, samples=10, seed=0, k=5, mutate=None, b_samples=0):
    """Run the battery of identities on random elements; returns a Report.

    ``mutate`` = "skip-phi" replaces L by the class projection of log (a
    deliberately wrong map) so that the beta-L check must fail.
    """
    rng = np.random.default_rng(seed)
    lc = LogContext(ctx, k)
    ring = lc.ring()
    rep = Report("harness", ctx.n, k)
    for s in range(samples):
        f = random_class_element(ctx, ring, rng, digits=k)
        b = beta(f)
        a = check_A(b)
        rep.add("check_A(beta)", [f"sample {s}"], a.passed, a.certified_precision,
                residual=None if a.passed else a.failures()[:1])
        back = delta_section(pr_cyc(b))
        ok, cert, _ = _equal(back, f)
        rep.add("delta-beta round trip", [f"sample {s}"], ok, cert)
    for s in range(samples):
        x = random_unit(ctx, ring, rng, digits=k)
        th = theta(x)
        m = check_M(th)
        rep.add("check_M(theta)", [f"unit {s}"], m.passed, m.certified_precision,
                residual=None if m.passed else m.failures()[:1])
        try:
            if mutate == "skip-phi":
                from .kone import teichmuller_decompose
                _, u = teichmuller_decompose(x)
                L = log_unit(u)
            else:
                L = integral_log_L(x)
            sl = script_L(th)
            bl = beta(L)
            okall, cert = True, lc.K
            for V in ctx.subgroups:
                ok, c, _ = _equal(bl[V], sl[V])
                okall &= ok
                cert = min(cert, c)
            rep.add("beta(L) = scriptL(theta)", [f"unit {s}"], okall, min(cert, k))
            G = ctx.lattice.g
            ok, c, _ = _equal(sl[G], lg_identity_rhs(th[G]))
            rep.add("LG identity", [f"unit {s}"], ok, min(c, k))
            if mutate is None:
                rep.add("omega(L) trivial", [f"unit {s}"], not any(omega(L)))
        except ToolkitError as exc:
            rep.add("beta(L) = scriptL(theta)", [f"unit {s}"], False, note=str(exc))
    if b_samples:
        from .skewseries import b_suite
        b_suite(ctx, lc, rng, b_samples, rep)
    return rep


# -- level stability ----------------------------------------------------------------

def project_value(value, ring_low):
    """Image of a finite-level value under G_n -> G_m (fold z-exponents mod p^m)."""
    data = value.data
    pn_lo = ring_low.pn
    folded = np.zeros(data.shape[:-1] + (pn_lo,), dtype=np.int64)
    for m in range(data.shape[-1]):
        folded[..., m % pn_lo] = (folded[..., m % pn_lo] + data[..., m]) % ring_low.mod
    return ring_low.wrap(folded, value.scale, min(value.prec, ring_low.K))


def _project(obj, ctx_low, ring_low):
    if isinstance(obj, ComponentTuple):
        return type(obj)(ctx_low, {pos: _project(c, ctx_low, ring_low) for pos, c in obj})
    val = project_value(obj.value, ring_low)
    if isinstance(obj, AbelianElement):
        return AbelianElement(ctx_low, _low_alg(ctx_low, obj), val)
    if isinstance(obj, ConjClassElement):
        return ConjClassElement(ctx_low, val, obj.subgroup.position)
    return GroupRingElement(ctx_low, val)


def _low_alg(ctx_low, obj):
    name = obj.alg.name
    for U in ctx_low.subgroups:
        if name == f"{U.label}^ab":
            return ctx_low.ab(U)
    raise ValueError(f"no algebra {name} at the lower level")


def _agree(a, b, rep, condition, who, k):
    if isinstance(a, ComponentTuple):
        ok, cert = True, k
        for pos, c in a:
            d = c.value - b.components[pos].value
            ok &= d.is_zero()
            cert = min(cert, d.certified)
    else:
        d = a.value - b.value
        ok, cert = d.is_zero(), min(k, d.certified)
    rep.add(condition, who, ok, cert)


def level_stability(group, n_low=1, k=5, samples=5, seed=0):
    """Compute beta, delta-pr_cyc, theta, L and script-L at level n_low + 1,
    project to level n_low and compare with the level-n_low results."""
    from .group import FiniteQuotient
    ctx_hi = AlgebraContext(FiniteQuotient(group, n_low + 1))
    ctx_lo = AlgebraContext(FiniteQuotient(group, n_low))
    lc_hi, lc_lo = LogContext(ctx_hi, k), LogContext(ctx_lo, k)
    K = min(lc_hi.K, lc_lo.K)
    ring_hi = lc_hi.ring().with_precision(K)
    ring_lo = lc_lo.ring().with_precision(K)
    rng = np.random.default_rng(seed)
    rep = Report("level-stability", n_low, k)
    pair = f"n={n_low + 1} -> n={n_low}"
    for s in range(samples):
        f = random_class_element(ctx_hi, ring_hi, rng, digits=k)
        f_lo = _project(f, ctx_lo, ring_lo)
        b = beta(f)
        a = check_A(b)
        rep.add("check_A(beta) at the upper level", [pair, f"sample {s}"], a.passed,
                a.certified_precision)
        _agree(_project(b, ctx_lo, ring_lo), beta(f_lo), rep, "beta", [pair, f"sample {s}"], k)
        back = delta_section(pr_cyc(b))
        _agree(_project(back, ctx_lo, ring_lo), delta_section(pr_cyc(beta(f_lo))), rep,
               "delta-pr_cyc-beta", [pair, f"sample {s}"], k)
    for s in range(samples):
        x = random_unit(ctx_hi, ring_hi, rng, digits=k)
        x_lo = _project(x, ctx_lo, ring_lo)
        th, th_lo = theta(x), theta(x_lo)
        m = check_M(th)
        rep.add("check_M(theta) at the upper level", [pair, f"unit {s}"], m.passed,
                m.certified_precision)
        _agree(_project(th, ctx_lo, ring_lo), th_lo, rep, "theta", [pair, f"unit {s}"], k)
        L, L_lo = integral_log_L(x), integral_log_L(x_lo)
        _agree(_project(L, ctx_lo, ring_lo), L_lo, rep, "L", [pair, f"unit {s}"], k)
        _agree(_project(script_L(th), ctx_lo, ring_lo), script_L(th_lo), rep, "scriptL",
               [pair, f"unit {s}"], k)
    return rep

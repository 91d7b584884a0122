"""Line-oriented integer file formats for units, class elements and tuples.

Layout::

    format: iwasawa-k1
    kind: unit | class | additive-tuple | unit-tuple
    level: 1
    precision: 5
    coefficient_ring: Lambda | B
    t_weight: 32                 (B only)
    invertible: required         (unit kinds only)

    component: U3
    scale: 0
    certified: 5                 ("exact" for exact integer data)
    t_bound: 544                 (B only; "inf" for exact data)
    entry: 4 : 17

Each component's value is sum(entries) / p^scale.  Entry keys are ``r m``
(R-index and z-exponent, giving the group element r z^m or its class) for
unit and class files, and a single Smith index of U^ab at the stated level
for tuple components.  With B coefficients the value part is
``lo=<d> c_0 c_1 ...`` meaning sum_j c_j t^(d + j), t = z - 1.
"""

from __future__ import annotations

import numpy as np

from .algebra import (AbelianElement, AdditiveTuple, ConjClassElement, GroupRingElement,
                      UnitTuple)
from .errors import InvalidInput
from .zring import INF, FiniteZ, LaurentZ

FORMAT = "iwasawa-k1"
KINDS = ("unit", "class", "additive-tuple", "unit-tuple")


class DataFile:
    def __init__(self, kind, level, precision, coefficient_ring="Lambda", t_weight=None):
        if kind not in KINDS:
            raise InvalidInput(f"unknown kind {kind!r}")
        if coefficient_ring not in ("Lambda", "B"):
            raise InvalidInput("coefficient_ring must be Lambda or B")
        self.kind = kind
        self.level = int(level)
        self.precision = int(precision)
        self.coefficient_ring = coefficient_ring
        self.t_weight = t_weight
        self.components = []  # (label, scale, certified, t_bound, [(key, value)])

    # -- text ------------------------------------------------------------------------
    def to_text(self) -> str:
        lines = [f"format: {FORMAT}", f"kind: {self.kind}", f"level: {self.level}",
                 f"precision: {self.precision}", f"coefficient_ring: {self.coefficient_ring}"]
        if self.coefficient_ring == "B":
            lines.append(f"t_weight: {self.t_weight}")
        if self.kind in ("unit", "unit-tuple"):
            lines.append("invertible: required")
        for label, scale, certified, t_bound, entries in self.components:
            cert = "exact" if certified == INF else certified
            lines += ["", f"component: {label}", f"scale: {scale}", f"certified: {cert}"]
            if self.coefficient_ring == "B":
                lines.append(f"t_bound: {'inf' if t_bound == INF else int(t_bound)}")
            for key, val in entries:
                k = " ".join(str(x) for x in key)
                if self.coefficient_ring == "B":
                    lo, coeffs = val
                    v = f"lo={lo} " + " ".join(str(c) for c in coeffs)
                else:
                    v = str(val)
                lines.append(f"entry: {k} : {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> DataFile:
        head, comps, cur = {}, [], None
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" not in line:
                raise InvalidInput(f"line {n}: expected 'key: value'")
            key, value = (s.strip() for s in line.split(":", 1))
            if key == "component":
                cur = {"label": value, "scale": 0, "certified": None, "t_bound": INF, "entries": []}
                comps.append(cur)
            elif key == "entry":
                if cur is None:
                    raise InvalidInput(f"line {n}: entry before any component")
                if ":" not in value:
                    raise InvalidInput(f"line {n}: entry needs 'key : value'")
                k, v = (s.strip() for s in value.split(":", 1))
                try:
                    keyt = tuple(int(x) for x in k.split())
                    if v.startswith("lo="):
                        parts = v.split()
                        val = (int(parts[0][3:]), [int(c) for c in parts[1:]])
                    else:
                        val = int(v)
                except ValueError:
                    raise InvalidInput(f"line {n}: non-integer entry") from None
                cur["entries"].append((keyt, val))
            elif cur is not None and key in ("scale", "certified", "t_bound"):
                try:
                    cur[key] = INF if value in ("inf", "exact") else int(value)
                except ValueError:
                    raise InvalidInput(f"line {n}: {key} must be an integer") from None
            else:
                head[key] = value
        if head.get("format") != FORMAT:
            raise InvalidInput(f"not an {FORMAT} data file")
        try:
            df = cls(head["kind"], int(head["level"]), int(head["precision"]),
                     head.get("coefficient_ring", "Lambda"),
                     int(head["t_weight"]) if "t_weight" in head else None)
        except KeyError as exc:
            raise InvalidInput(f"missing header field {exc}") from None
        if df.coefficient_ring == "B" and df.t_weight is None:
            raise InvalidInput("B files need a t_weight header")
        for c in comps:
            cert = df.precision if c["certified"] is None else c["certified"]
            df.components.append((c["label"], c["scale"], cert, c["t_bound"], c["entries"]))
        return df

    # -- rings -------------------------------------------------------------------------
    def ring(self, ctx, K=None, M=None):
        K = self.precision if K is None else K
        if self.coefficient_ring == "B":
            return LaurentZ(ctx.p, K, M if M is not None else self.t_weight * K, self.t_weight)
        return FiniteZ(ctx.p, ctx.n, K)


# -- values <-> entries ---------------------------------------------------------------

def _value_entries(value, keys, cap):
    """[(key, coefficient)] for the rows of ``value`` (rows indexed like ``keys``)."""
    digits = min(value.prec, cap + value.scale)
    mod = value.ring.p ** max(digits, 0)
    out = []
    if value.laurent:
        v = value.trim()
        data = v.data % mod
        for row, key in enumerate(keys):
            cs = data[row]
            nz = np.nonzero(cs)[0]
            if len(nz):
                a, b = int(nz[0]), int(nz[-1])
                out.append((key, (v.lo + a, [int(c) for c in cs[a: b + 1]])))
        return out
    data = value.data % mod
    for row, key in enumerate(keys):
        for m in range(data.shape[-1]):
            c = int(data[row, m])
            if c:
                out.append((key + (m,), c))
    return out


def _component(label, value, keys, exact):
    cert = INF if exact else int(value.certified)
    return (label, int(value.scale), cert, value.M if value.laurent else INF,
            _value_entries(value, keys, value.certified))


# ``precision`` is the target p-adic precision recorded in the header; every
# certified digit of the value is written.  ``exact`` marks the integers as an
# exact representative (inputs produced by sampling or by hand).

def dump_unit(x: GroupRingElement, precision, exact=False):
    ring = x.value.ring
    df = _new_file(x.ctx, "unit", precision, ring)
    keys = [(r,) for r in range(x.ctx.group.nr)]
    df.components.append(_component("G", x.value, keys, exact))
    return df


def dump_class(f: ConjClassElement, precision, exact=False):
    ctx = f.ctx
    df = _new_file(ctx, "class", precision, f.value.ring)
    keys = [(int(r),) for r in ctx.classes(f.subgroup).reps]
    df.components.append(_component(f.subgroup.label, f.value, keys, exact))
    return df


def dump_tuple(t, precision, exact=False):
    ctx = t.ctx
    kind = "unit-tuple" if isinstance(t, UnitTuple) else "additive-tuple"
    first = next(iter(t.components.values()))
    df = _new_file(ctx, kind, precision, first.value.ring)
    for pos, comp in t:
        U = ctx.sub(pos)
        df.components.append(_tuple_component(ctx, U, comp.value, exact))
    return df


def _tuple_component(ctx, U, value, exact):
    sec = U.abelianization
    smith = sec.smith(ctx.n)
    cert = INF if exact else int(value.certified)
    digits = value.prec
    mod = value.ring.p ** max(digits, 0)
    entries = {}
    if value.laurent:
        v = value.trim()
        data = v.data % mod
        for t in range(sec.size):
            cs = data[t]
            nz = np.nonzero(cs)[0]
            if len(nz):
                a, b = int(nz[0]), int(nz[-1])
                entries[smith.smith_index(t, 0)] = (v.lo + a, [int(c) for c in cs[a: b + 1]])
        return (U.label, int(value.scale), cert, value.M, sorted(((k,), v) for k, v in entries.items()))
    data = value.data % mod
    for t in range(sec.size):
        for m in range(data.shape[-1]):
            c = int(data[t, m])
            if c:
                entries[smith.smith_index(t, m)] = c
    return (U.label, int(value.scale), cert, INF, sorted(((k,), v) for k, v in entries.items()))


def _new_file(ctx, kind, precision, ring):
    if isinstance(ring, LaurentZ):
        return DataFile(kind, ctx.n, precision, "B", ring.D)
    return DataFile(kind, ctx.n, precision)


def _build_value(ring, rows, entries_by_row, scale, certified, t_bound):
    """Assemble a ZArr with ``rows`` rows from {row: [(m, value)]}."""
    prec = ring.K if certified == INF else min(ring.K, certified + scale)
    if isinstance(ring, LaurentZ):
        los = [lo for items in entries_by_row.values() for _, (lo, _) in items]
        his = [lo + len(cs) for items in entries_by_row.values() for _, (lo, cs) in items]
        lo = min(los) if los else 0
        width = max(max(his) - lo if his else 1, 1)
        data = np.zeros((rows, width), dtype=np.int64)
        for row, items in entries_by_row.items():
            for _, (l, cs) in items:
                data[row, l - lo: l - lo + len(cs)] += np.asarray(cs, dtype=np.int64)
        return ring.wrap(data, lo=lo, scale=scale, prec=prec, M=t_bound)
    data = np.zeros((rows, ring.pn), dtype=np.int64)
    for row, items in entries_by_row.items():
        for m, val in items:
            if isinstance(val, tuple):
                raise InvalidInput("B-coefficient entry in a Lambda file")
            data[row, m % ring.pn] += val
    return ring.wrap(data, scale, prec)


def _check_level(df, ctx):
    if df.level != ctx.n:
        raise InvalidInput(f"file is at level {df.level}, working level is {ctx.n}")


def load_unit(df: DataFile, ctx, ring) -> GroupRingElement:
    _check_level(df, ctx)
    if df.kind != "unit" or len(df.components) != 1:
        raise InvalidInput("expected a unit file with one component")
    _, scale, cert, t_bound, entries = df.components[0]
    by_row = {}
    for key, val in entries:
        if isinstance(ring, LaurentZ):
            if len(key) != 1:
                raise InvalidInput("B unit entries are keyed by an R-index")
            r, m = key[0], 0
        else:
            if len(key) != 2:
                raise InvalidInput("unit entries are keyed by 'r m'")
            r, m = key
        if not 0 <= r < ctx.group.nr:
            raise InvalidInput(f"R-index {r} out of range")
        by_row.setdefault(r, []).append((m, val))
    return GroupRingElement(ctx, _build_value(ring, ctx.group.nr, by_row, scale, cert, t_bound))


def load_class(df: DataFile, ctx, ring) -> ConjClassElement:
    _check_level(df, ctx)
    if df.kind != "class" or len(df.components) != 1:
        raise InvalidInput("expected a class file with one component")
    label, scale, cert, t_bound, entries = df.components[0]
    X = ctx.sub(label)
    cm = ctx.classes(X)
    reps = set(cm.reps.tolist())
    by_row = {}
    for key, val in entries:
        r = key[0]
        m = key[1] if len(key) > 1 else 0
        if r not in reps:
            raise InvalidInput(f"R-index {r} is not a class representative of {X.label}")
        by_row.setdefault(int(cm.orbit_of[r]), []).append((m, val))
    return ConjClassElement(ctx, _build_value(ring, cm.size, by_row, scale, cert, t_bound), X)


def load_tuple(df: DataFile, ctx, ring):
    _check_level(df, ctx)
    if df.kind not in ("additive-tuple", "unit-tuple"):
        raise InvalidInput("expected a tuple file")
    comps = {}
    for label, scale, cert, t_bound, entries in df.components:
        U = ctx.sub(label)
        alg = ctx.ab(U)
        smith = U.abelianization.smith(ctx.n)
        by_row = {}
        for key, val in entries:
            if len(key) != 1:
                raise InvalidInput("tuple entries are keyed by one Smith index")
            try:
                t, m = smith.element_of[key[0]]
            except (IndexError, KeyError):
                raise InvalidInput(f"Smith index {key[0]} out of range for {label}") from None
            by_row.setdefault(int(t), []).append((int(m), val))
        comps[U.position] = AbelianElement(
            ctx, alg, _build_value(ring, alg.size, by_row, scale, cert, t_bound))
    missing = [U.label for U in ctx.subgroups if U.position not in comps]
    if missing:
        raise InvalidInput(f"tuple file lacks components {missing}")
    cls = UnitTuple if df.kind == "unit-tuple" else AdditiveTuple
    return cls(ctx, comps)

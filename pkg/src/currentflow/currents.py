"""Finite-mass k-currents in R^d: Dirac atoms and simplicial chains.

Currents are evaluated against test forms through a quadrature atomization:
every current decomposes into weighted point atoms carrying simple
orienting k-vectors with witness factorizations.  Simplex quadrature is
fixed at order 5; accuracy is controlled by mesh subdivision only.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .exterior import MultiVector, simple_mass

MAX_ATOMS = 100_000

# order-5 Gauss-Legendre nodes on [0, 1]
_GL3_NODES = np.array([0.5 - math.sqrt(15.0) / 10.0, 0.5, 0.5 + math.sqrt(15.0) / 10.0])
_GL3_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0

# order-5 seven-point rule on the reference triangle, barycentric
_T7_A1 = (6.0 - math.sqrt(15.0)) / 21.0
_T7_A2 = (6.0 + math.sqrt(15.0)) / 21.0
_T7_BARY = np.array(
    [[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]]
    + [[1.0 - 2.0 * _T7_A1 if i == j else _T7_A1 for j in range(3)] for i in range(3)]
    + [[1.0 - 2.0 * _T7_A2 if i == j else _T7_A2 for j in range(3)] for i in range(3)]
)
_T7_WEIGHTS = np.array(
    [9.0 / 40.0]
    + [(155.0 - math.sqrt(15.0)) / 1200.0] * 3
    + [(155.0 + math.sqrt(15.0)) / 1200.0] * 3
)


class CurrentError(ValueError):
    pass


class Atom:
    """Weighted Dirac atom: weight * tau at a point, tau simple with witness."""

    __slots__ = ("point", "vector", "weight")

    def __init__(self, point, vector: MultiVector, weight: float):
        self.point = np.asarray(point, dtype=float)
        self.vector = vector
        self.weight = float(weight)


class AtomicCurrent:
    """A finite sum of Dirac atoms of a common grade."""

    def __init__(self, dimension, grade, atoms):
        self.dimension = dimension
        self.grade = grade
        self.atoms = list(atoms)
        if len(self.atoms) > MAX_ATOMS:
            raise CurrentError(f"atom count {len(self.atoms)} exceeds {MAX_ATOMS}")
        self.flagged = False

    def atomize(self, subdivisions=1):
        return self.atoms

    def mass(self):
        """Sum of atom masses; witnesses give the exact simple mass, merged
        witness-free atoms fall back to the coefficient norm (exact in
        grades 0, 1 and d)."""
        total = 0.0
        for a in self.atoms:
            if a.vector.witness is not None:
                total += abs(a.weight) * simple_mass(a.vector)
            else:
                total += abs(a.weight) * a.vector.norm()
        return total


class DiracCurrent:
    """weight * tau * delta_x with tau a simple k-vector."""

    def __init__(self, point, vector: MultiVector, weight=1.0):
        self.point = np.asarray(point, dtype=float)
        if self.point.shape != (vector.dimension,):
            raise CurrentError("point dimension does not match orienting vector")
        if vector.grade > 0 and vector.witness is None:
            raise CurrentError("orienting vector must be simple with a stored witness")
        self.vector = vector
        self.weight = float(weight)
        self.dimension = vector.dimension
        self.grade = vector.grade
        self.flagged = False

    def atomize(self, subdivisions=1):
        return [Atom(self.point, self.vector, self.weight)]

    def mass(self):
        return abs(self.weight) * simple_mass(self.vector)


def _subdivide_segment(a, b, n):
    ts = np.linspace(0.0, 1.0, n + 1)
    return [(a + (b - a) * ts[i], a + (b - a) * ts[i + 1]) for i in range(n)]


def _subdivide_triangle(v0, v1, v2, n):
    """Uniform refinement into n^2 congruent triangles (barycentric lattice)."""
    pt = lambda i, j: v0 + (v1 - v0) * (i / n) + (v2 - v0) * (j / n)
    tris = []
    for i in range(n):
        for j in range(n - i):
            tris.append((pt(i, j), pt(i + 1, j), pt(i, j + 1)))
            if j < n - i - 1:
                tris.append((pt(i + 1, j), pt(i + 1, j + 1), pt(i, j + 1)))
    return tris


class SimplicialCurrent:
    """Oriented k-simplices over a shared vertex list, with multiplicities."""

    def __init__(self, vertices, simplices, multiplicities, grade=None):
        self.vertices = np.asarray(vertices, dtype=float)
        self.simplices = [tuple(int(i) for i in s) for s in simplices]
        self.multiplicities = np.asarray(multiplicities, dtype=float)
        if self.vertices.ndim != 2:
            raise CurrentError("vertices must be an (n, d) array")
        if len(self.simplices) != self.multiplicities.size:
            raise CurrentError("one multiplicity per simplex required")
        if len(self.simplices) > MAX_ATOMS:
            raise CurrentError(f"simplex count exceeds {MAX_ATOMS}")
        sizes = {len(s) for s in self.simplices}
        if len(sizes) > 1:
            raise CurrentError("simplices must share a single grade")
        k = (sizes.pop() - 1) if sizes else (grade if grade is not None else 0)
        if grade is not None and sizes and grade != k:
            raise CurrentError("declared grade does not match simplex size")
        self.grade = k
        self.dimension = self.vertices.shape[1]
        if self.grade > 2:
            raise CurrentError("quadrature implemented for grades 0, 1 and 2 only")
        self.flagged = False

    def simplex_volume(self, s):
        V = self.vertices[list(s)]
        if len(s) == 1:
            return 1.0
        E = V[1:] - V[0]
        gram = E @ E.T
        return math.sqrt(max(np.linalg.det(gram), 0.0)) / math.factorial(len(s) - 1)

    def mass(self):
        return float(sum(abs(m) * self.simplex_volume(s)
                         for s, m in zip(self.simplices, self.multiplicities)))

    def atomize(self, subdivisions=1):
        n = max(1, int(subdivisions))
        atoms = []
        d = self.dimension
        for s, mult in zip(self.simplices, self.multiplicities):
            if mult == 0.0:
                continue
            V = self.vertices[list(s)]
            if self.grade == 0:
                atoms.append(Atom(V[0], MultiVector.scalar(d, 1.0), mult))
            elif self.grade == 1:
                for a, b in _subdivide_segment(V[0], V[1], n):
                    tau = MultiVector.from_vectors([b - a])
                    for q, w in zip(_GL3_NODES, _GL3_WEIGHTS):
                        atoms.append(Atom(a + (b - a) * q, tau, mult * w))
            else:
                for v0, v1, v2 in _subdivide_triangle(V[0], V[1], V[2], n):
                    tau = MultiVector.from_vectors([v1 - v0, v2 - v0]) * 0.5
                    pts = _T7_BARY @ np.stack([v0, v1, v2])
                    for p, w in zip(pts, _T7_WEIGHTS):
                        atoms.append(Atom(p, tau, mult * w))
            if len(atoms) > MAX_ATOMS:
                raise CurrentError(f"atom count exceeds {MAX_ATOMS}")
        return atoms


def evaluate(T, form, subdivisions=1):
    """<T, omega>: quadrature-exact to order 5 per mesh cell."""
    if T.grade != form.grade or T.dimension != form.dimension:
        raise CurrentError(
            f"grade/dimension mismatch: current ({T.dimension},{T.grade}), "
            f"form ({form.dimension},{form.grade})"
        )
    atoms = T.atomize(subdivisions)
    if not atoms:
        return 0.0
    pts = np.stack([a.point for a in atoms])
    coeffs = np.stack([a.vector.coefficients * a.weight for a in atoms])
    W = form.eval_batch(pts)
    return float(np.sum(coeffs * W))


def boundary(T: SimplicialCurrent) -> SimplicialCurrent:
    """Alternating face sum; duplicate faces are combined exactly.

    Face orientations are canonicalized by sorting vertex indices, so
    opposite interior faces cancel in multiplicity arithmetic.
    """
    if not isinstance(T, SimplicialCurrent):
        raise CurrentError("boundary is materialized for simplicial currents only; "
                           "use weak_boundary_eval for Dirac currents")
    if T.grade < 1:
        raise CurrentError("boundary undefined for 0-currents")
    acc = {}
    for s, mult in zip(T.simplices, T.multiplicities):
        for i in range(len(s)):
            face = s[:i] + s[i + 1:]
            sign = (-1) ** i
            key, perm = _canonical_face(face)
            acc[key] = acc.get(key, 0.0) + sign * perm * mult
    faces, mults = [], []
    for key, m in sorted(acc.items()):
        if m != 0.0:
            faces.append(key)
            mults.append(m)
    return SimplicialCurrent(T.vertices, faces, mults, grade=T.grade - 1)


def _canonical_face(face):
    idx = list(face)
    sign = 1
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    return tuple(idx), sign


def weak_boundary_eval(T, eta, subdivisions=1):
    """<dT, eta> = <T, d eta>, without materializing the boundary."""
    if T.grade < 1:
        raise CurrentError("boundary pairing requires grade >= 1")
    return evaluate(T, eta.exterior_derivative(), subdivisions)


def mass(T):
    return T.mass()


def distance(S, T, dictionary, subdivisions=1):
    """Test-form metric: max |<S - T, omega>| over the dictionary."""
    best = 0.0
    for form in dictionary:
        val = abs(evaluate(S, form, subdivisions) - evaluate(T, form, subdivisions))
        best = max(best, val)
    return best


def combine_atoms(currents, weights, subdivisions=1, merge_tol=1e-12):
    """Weighted sum as an atomic current, merging coincident points.

    Merged atoms lose their witnesses; their coefficient vectors add.
    """
    dimension = currents[0].dimension
    grade = currents[0].grade
    merged = []
    for T, c in zip(currents, weights):
        if T.grade != grade or T.dimension != dimension:
            raise CurrentError("cannot combine currents of different type")
        for a in T.atomize(subdivisions):
            vec = a.vector * (a.weight * c)
            for b in merged:
                if np.max(np.abs(b.point - a.point)) <= merge_tol:
                    b.vector = b.vector + vec
                    break
            else:
                merged.append(Atom(a.point, vec, 1.0))
    out = AtomicCurrent(dimension, grade, [a for a in merged if a.vector.norm() > 0.0])
    return out


def to_dict(T):
    if isinstance(T, DiracCurrent):
        return {
            "kind": "dirac",
            "point": T.point.tolist(),
            "witness": [v.tolist() for v in (T.vector.witness or [])],
            "grade": T.grade,
            "dimension": T.dimension,
            "weight": T.weight,
        }
    if isinstance(T, SimplicialCurrent):
        return {
            "kind": "simplicial",
            "vertices": T.vertices.tolist(),
            "simplices": [list(s) for s in T.simplices],
            "multiplicities": T.multiplicities.tolist(),
            "grade": T.grade,
            "dimension": T.dimension,
        }
    raise CurrentError(f"cannot serialize {type(T).__name__}")


def from_dict(data):
    kind = data.get("kind")
    if kind == "dirac":
        d, k = data["dimension"], data["grade"]
        if k == 0:
            tau = MultiVector.scalar(d, 1.0)
        else:
            tau = MultiVector.from_vectors(data["witness"])
        return DiracCurrent(data["point"], tau, data.get("weight", 1.0))
    if kind == "simplicial":
        return SimplicialCurrent(
            data["vertices"], data["simplices"], data["multiplicities"],
            grade=data.get("grade"),
        )
    raise CurrentError(f"unknown current kind {kind!r}")


def to_json(T, path):
    with open(path, "w") as fh:
        json.dump(to_dict(T), fh, indent=2, sort_keys=True)


def from_json(path):
    with open(path) as fh:
        return from_dict(json.load(fh))

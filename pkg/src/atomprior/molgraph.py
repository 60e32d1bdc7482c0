"""SMILES parsing and molecular graph perception.

The parser covers the organic subset plus bracket atoms (isotope, H count,
charge), ring closures 1-9 and %nn, branches, bond symbols ``- = # :`` and
the stereo markers ``/ \\ @`` (parsed and discarded). Disconnected
components may be joined with ``.``.

Perception runs in a fixed order after parsing: ring perception (smallest
set of smallest rings), kekulization of lowercase-aromatic input,
implicit-hydrogen filling with valence checks, Hueckel aromaticity,
hybridization, environment classes, conjugation and rotatable bonds.
All parse errors carry the byte offset of the offending character.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .elements import (
    AROMATIC_ELEMENTS,
    ATOMIC_NUMBERS,
    DEFAULT_VALENCES,
    ORGANIC_SUBSET,
    VALENCE_ELECTRONS,
    allowed_valences,
)

HYBRIDIZATIONS = ("s", "sp", "sp2", "sp3", "sp3d", "sp3d2", "other")
ENV_TYPES = ("chain", "ring", "fused_ring")
BOND_ORDERS = ("single", "double", "triple", "aromatic")

# Lowercase symbols additionally allowed inside brackets ([se], [te]).
_BRACKET_AROMATIC = AROMATIC_ELEMENTS | {"Te"}

_BOND_SYMBOL_ORDER = {"-": 1, "=": 2, "#": 3, "/": 1, "\\": 1}


class SmilesError(ValueError):
    """Base class for SMILES parse and perception failures."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class EmptyInput(SmilesError):
    pass


class UnknownElement(SmilesError):
    pass


class UnbalancedBracket(SmilesError):
    pass


class UnbalancedParen(SmilesError):
    pass


class UnbalancedRingClosure(SmilesError):
    pass


class ValenceViolation(SmilesError):
    pass


class KekulizationFailure(SmilesError):
    pass


@dataclass
class Atom:
    """One heavy atom of a molecular graph.

    ``implicit_h`` counts hydrogens that are not graph nodes (filled from
    the default valence table for organic-subset atoms, taken verbatim
    from the bracket for bracket atoms). ``smallest_ring_size`` is the
    minimum size over the SSSR rings containing the atom, 0 off-ring.
    """

    element: str
    formal_charge: int = 0
    implicit_h: int = 0
    aromatic: bool = False
    isotope: int = 0
    degree: int = 0
    hybridization: str = "sp3"
    in_ring: bool = False
    smallest_ring_size: int = 0
    env_type: str = "chain"


@dataclass
class Bond:
    """An edge between atoms ``a`` and ``b`` (indices into Molecule.atoms).

    ``order`` is the perceived order; aromatic bonds additionally keep the
    integer ``kekule_order`` assigned during kekulization so that valence
    arithmetic stays well defined.
    """

    a: int
    b: int
    order: str = "single"
    kekule_order: int = 1
    in_ring: bool = False
    conjugated: bool = False
    rotatable: bool = False

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


@dataclass
class Molecule:
    """A perceived molecular graph. Treated as immutable after perception."""

    atoms: list[Atom]
    bonds: list[Bond]
    rings: list[list[int]] = field(default_factory=list)
    source_smiles: str = ""
    _adj: list[list[tuple[int, int]]] = field(default_factory=list, repr=False)

    def _build_adjacency(self) -> None:
        self._adj = [[] for _ in self.atoms]
        for bi, bond in enumerate(self.bonds):
            self._adj[bond.a].append((bond.b, bi))
            self._adj[bond.b].append((bond.a, bi))

    def neighbors(self, idx: int) -> list[int]:
        return [j for j, _ in self._adj[idx]]

    def incident_bonds(self, idx: int) -> list[Bond]:
        return [self.bonds[bi] for _, bi in self._adj[idx]]

    def bond_between(self, i: int, j: int) -> Bond | None:
        for k, bi in self._adj[i]:
            if k == j:
                return self.bonds[bi]
        return None

    @property
    def formal_charge(self) -> int:
        return sum(a.formal_charge for a in self.atoms)

    def ring_count(self, idx: int) -> int:
        return sum(1 for ring in self.rings if idx in ring)


# ---------------------------------------------------------------------------
# tokenizing / parsing
# ---------------------------------------------------------------------------


@dataclass
class _ParsedAtom:
    element: str
    aromatic_input: bool
    charge: int
    hcount: int | None  # None: fill from the default valence table
    isotope: int
    offset: int
    merged_h: int = 0


@dataclass
class _ParsedBond:
    a: int
    b: int
    symbol: str | None
    offset: int


def _parse_bracket(text: str, start: int) -> tuple[_ParsedAtom, int]:
    """Parse a bracket atom beginning at ``text[start] == '['``."""
    n = len(text)
    j = start + 1
    isotope = 0
    while j < n and text[j].isdigit():
        isotope = isotope * 10 + int(text[j])
        j += 1
    if j >= n:
        raise UnbalancedBracket("unterminated bracket atom", start)

    ch = text[j]
    element = None
    aromatic = False
    if ch.isupper():
        if j + 1 < n and text[j + 1].islower() and ch + text[j + 1] in ATOMIC_NUMBERS:
            # avoid swallowing an H-count: [ClH] vs [CH4]
            two = ch + text[j + 1]
            if not (text[j + 1] == "h"):
                element = two
                j += 2
        if element is None:
            if ch in ATOMIC_NUMBERS:
                element = ch
                j += 1
            else:
                raise UnknownElement(f"unknown element {ch!r}", j)
    elif ch.islower():
        two = (ch + text[j + 1]).capitalize() if j + 1 < n else ""
        if two in ("Se", "As", "Te"):
            element = two
            aromatic = True
            j += 2
        elif ch in "bcnops":
            element = ch.upper()
            aromatic = True
            j += 1
        else:
            raise UnknownElement(f"unknown aromatic symbol {ch!r}", j)
        if element not in _BRACKET_AROMATIC:
            raise UnknownElement(f"element {element} cannot be aromatic", j)
    else:
        raise UnknownElement(f"expected element symbol, got {ch!r}", j)

    while j < n and text[j] == "@":  # tetrahedral stereo, discarded
        j += 1

    hcount = 0
    if j < n and text[j] == "H":
        j += 1
        if j < n and text[j].isdigit():
            hcount = 0
            while j < n and text[j].isdigit():
                hcount = hcount * 10 + int(text[j])
                j += 1
        else:
            hcount = 1

    charge = 0
    if j < n and text[j] in "+-":
        sign = 1 if text[j] == "+" else -1
        j += 1
        if j < n and text[j].isdigit():
            mag = 0
            while j < n and text[j].isdigit():
                mag = mag * 10 + int(text[j])
                j += 1
            charge = sign * mag
        else:
            charge = sign
            while j < n and text[j] in "+-" and text[j] == ("+" if sign > 0 else "-"):
                charge += sign
                j += 1

    if j < n and text[j] == ":":  # atom class, discarded
        j += 1
        if j >= n or not text[j].isdigit():
            raise UnbalancedBracket("malformed atom class", j)
        while j < n and text[j].isdigit():
            j += 1

    if j >= n or text[j] != "]":
        raise UnbalancedBracket("unterminated bracket atom", start)
    atom = _ParsedAtom(element, aromatic, charge, hcount, isotope, start)
    return atom, j + 1 - start


def _scan(text: str) -> tuple[list[_ParsedAtom], list[_ParsedBond]]:
    """Tokenize a SMILES string into parsed atoms and bonds."""
    n = len(text)
    i = 0
    while i < n and text[i].isspace():
        i += 1
    if i >= n:
        raise EmptyInput("empty SMILES", 0)

    atoms: list[_ParsedAtom] = []
    bonds: list[_ParsedBond] = []
    seen_pairs: set[frozenset[int]] = set()
    stack: list[tuple[int, int]] = []  # (atom index, '(' offset)
    ring_open: dict[int, tuple[int, str | None, int]] = {}
    prev: int | None = None
    pending: str | None = None
    pending_off = 0

    def add_bond(a: int, b: int, symbol: str | None, offset: int) -> None:
        if a == b:
            raise UnbalancedRingClosure("ring bond closes onto the same atom", offset)
        pair = frozenset((a, b))
        if pair in seen_pairs:
            raise SmilesError("duplicate bond between atoms", offset)
        seen_pairs.add(pair)
        bonds.append(_ParsedBond(a, b, symbol, offset))

    while i < n:
        ch = text[i]
        if ch.isspace():
            break
        if ch in "-=#:/\\":
            if pending is not None:
                raise SmilesError("two bond symbols in a row", i)
            pending = ch
            pending_off = i
            i += 1
            continue
        if ch == "(":
            if prev is None:
                raise UnbalancedParen("branch before any atom", i)
            if pending is not None:
                raise SmilesError("bond symbol before '('", pending_off)
            stack.append((prev, i))
            i += 1
            continue
        if ch == ")":
            if not stack:
                raise UnbalancedParen("unmatched ')'", i)
            if pending is not None:
                raise SmilesError("dangling bond before ')'", pending_off)
            prev = stack.pop()[0]
            i += 1
            continue
        if ch == ".":
            if pending is not None:
                raise SmilesError("bond symbol before '.'", pending_off)
            if prev is None:
                raise SmilesError("'.' before any atom", i)
            prev = None
            i += 1
            continue
        if ch.isdigit() or ch == "%":
            if prev is None:
                raise UnbalancedRingClosure("ring closure before any atom", i)
            if ch == "%":
                if i + 2 >= n or not (text[i + 1].isdigit() and text[i + 2].isdigit()):
                    raise UnbalancedRingClosure("'%' needs two digits", i)
                num = int(text[i + 1 : i + 3])
                width = 3
            else:
                num = int(ch)
                width = 1
            if num in ring_open:
                other, sym0, _ = ring_open.pop(num)
                if sym0 is not None and pending is not None and sym0 != pending:
                    raise UnbalancedRingClosure(
                        f"ring closure {num} reopened with a conflicting bond", i
                    )
                add_bond(other, prev, sym0 if sym0 is not None else pending, i)
            else:
                ring_open[num] = (prev, pending, i)
            pending = None
            i += width
            continue
        if ch == "]":
            raise UnbalancedBracket("unmatched ']'", i)

        if ch == "[":
            atom, width = _parse_bracket(text, i)
        else:
            atom = None
            width = 0
            if ch.isupper():
                two = text[i : i + 2]
                if two in ("Cl", "Br"):
                    atom = _ParsedAtom(two, False, 0, None, 0, i)
                    width = 2
                elif ch in "BCNOPSFI":
                    atom = _ParsedAtom(ch, False, 0, None, 0, i)
                    width = 1
            elif ch in "bcnops":
                atom = _ParsedAtom(ch.upper(), True, 0, None, 0, i)
                width = 1
            if atom is None:
                raise UnknownElement(f"unexpected character {ch!r}", i)

        idx = len(atoms)
        atoms.append(atom)
        if prev is not None:
            add_bond(prev, idx, pending, atom.offset)
        elif pending is not None:
            raise SmilesError("bond symbol with no preceding atom", pending_off)
        prev = idx
        pending = None
        i += width

    tail = text[i:].strip()
    if tail:
        raise SmilesError(f"unexpected trailing text {tail[:10]!r}", i)
    if pending is not None:
        raise SmilesError("dangling bond at end of input", pending_off)
    if stack:
        raise UnbalancedParen("unclosed '('", stack[-1][1])
    if ring_open:
        num, (_, _, off) = next(iter(sorted(ring_open.items())))
        raise UnbalancedRingClosure(f"unclosed ring closure {num}", off)
    return atoms, bonds


def _merge_explicit_hydrogens(
    atoms: list[_ParsedAtom], bonds: list[_ParsedBond]
) -> tuple[list[_ParsedAtom], list[_ParsedBond]]:
    """Fold plain ``[H]`` leaf atoms into their neighbor's hydrogen count.

    Isotopic ([2H]) and charged ([H+]) hydrogens stay as graph nodes.
    """
    degree = [0] * len(atoms)
    for b in bonds:
        degree[b.a] += 1
        degree[b.b] += 1
    removable: set[int] = set()
    for i, a in enumerate(atoms):
        if (
            a.element == "H"
            and a.charge == 0
            and a.isotope == 0
            and not a.hcount
            and degree[i] == 1
        ):
            removable.add(i)
    if not removable:
        return atoms, bonds

    keep_bonds: list[_ParsedBond] = []
    for b in bonds:
        if b.a in removable and b.b in removable:
            # H-H: keep both atoms after all
            removable.discard(b.a)
            removable.discard(b.b)
    for b in bonds:
        if b.a in removable or b.b in removable:
            if b.symbol in ("=", "#"):
                raise ValenceViolation("multiple bond to hydrogen", b.offset)
            heavy = b.b if b.a in removable else b.a
            atoms[heavy].merged_h += 1
        else:
            keep_bonds.append(b)
    remap: dict[int, int] = {}
    kept: list[_ParsedAtom] = []
    for i, a in enumerate(atoms):
        if i not in removable:
            remap[i] = len(kept)
            kept.append(a)
    for b in keep_bonds:
        b.a = remap[b.a]
        b.b = remap[b.b]
    return kept, keep_bonds


# ---------------------------------------------------------------------------
# ring perception
# ---------------------------------------------------------------------------


def find_sssr(n_atoms: int, bond_pairs: Sequence[tuple[int, int]]) -> list[list[int]]:
    """Smallest set of smallest rings for a simple undirected graph.

    Candidate cycles come from Horton's construction (shortest paths from
    every vertex to both ends of every edge); candidates are sorted by
    (size, lexicographic atom set) and greedily added while linearly
    independent over GF(2) on edge vectors, until the cyclomatic number
    bonds - atoms + components is reached. Ties therefore resolve to the
    lexicographically smallest atom-index set.
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    for ei, (a, b) in enumerate(bond_pairs):
        adj[a].append((b, ei))
        adj[b].append((a, ei))

    seen = [False] * n_atoms
    components = 0
    for start in range(n_atoms):
        if seen[start]:
            continue
        components += 1
        queue = [start]
        seen[start] = True
        while queue:
            u = queue.pop()
            for v, _ in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    queue.append(v)
    target = len(bond_pairs) - n_atoms + components
    if target <= 0:
        return []

    edge_index = {frozenset(p): ei for ei, p in enumerate(bond_pairs)}

    candidates: list[tuple[int, tuple[int, ...], list[int], int]] = []
    seen_cycles: set[frozenset[int]] = set()
    for root in range(n_atoms):
        dist = {root: 0}
        parent: dict[int, int] = {}
        frontier = [root]
        while frontier:
            nxt: list[int] = []
            for u in frontier:
                for v, _ in adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        parent[v] = u
                        nxt.append(v)
            frontier = nxt

        def path_to(v: int) -> list[int]:
            out = [v]
            while out[-1] != root:
                out.append(parent[out[-1]])
            out.reverse()
            return out

        for a, b in bond_pairs:
            if a not in dist or b not in dist:
                continue
            if parent.get(a) == b or parent.get(b) == a:
                continue
            pa, pb = path_to(a), path_to(b)
            if set(pa) & set(pb) != {root}:
                continue
            cycle = pa + pb[::-1][:-1]
            key = frozenset(cycle)
            if len(key) != len(cycle) or key in seen_cycles:
                continue
            seen_cycles.add(key)
            mask = 0
            ok = True
            for x, y in zip(cycle, cycle[1:] + cycle[:1]):
                ei = edge_index.get(frozenset((x, y)))
                if ei is None:
                    ok = False
                    break
                mask |= 1 << ei
            if ok:
                candidates.append((len(cycle), tuple(sorted(cycle)), cycle, mask))

    candidates.sort(key=lambda c: (c[0], c[1]))
    basis: list[tuple[int, int]] = []  # (pivot bit, vector)
    chosen: list[list[int]] = []
    for _, _, cycle, mask in candidates:
        vec = mask
        for pivot, bvec in basis:
            if vec & pivot:
                vec ^= bvec
        if vec:
            basis.append((vec & -vec, vec))
            chosen.append(cycle)
            if len(chosen) == target:
                break
    return chosen


# ---------------------------------------------------------------------------
# kekulization
# ---------------------------------------------------------------------------


def _needs_pi_bond(elem: str, charge: int, sigma: int, hcount: int | None) -> bool:
    """Whether an aromatic atom must receive a ring double bond."""
    h = hcount or 0
    if elem == "C":
        return charge == 0
    if elem in ("N", "P", "As"):
        if charge > 0:
            return True
        if charge == 0:
            return sigma == 2 and h == 0
        return False
    if elem in ("O", "S", "Se", "Te"):
        return charge > 0
    return False  # boron: empty p orbital


def _kekulize(
    atoms: list[_ParsedAtom],
    bonds: list[_ParsedBond],
    rings: list[list[int]],
    sigma_degree: list[int],
) -> list[int]:
    """Assign integer orders to every bond; returns the order list.

    Ring bonds between lowercase-aromatic atoms form the matching graph;
    a perfect matching over the atoms that need a pi bond fixes the
    alternating single/double pattern. Failure to match raises
    KekulizationFailure at the first uncovered atom.
    """
    ring_atoms: set[int] = set()
    ring_edges: set[frozenset[int]] = set()
    for ring in rings:
        ring_atoms.update(ring)
        for x, y in zip(ring, ring[1:] + ring[:1]):
            ring_edges.add(frozenset((x, y)))

    orders = []
    for b in bonds:
        if b.symbol == "=":
            orders.append(2)
        elif b.symbol == "#":
            orders.append(3)
        else:
            orders.append(1)

    arom = [a.aromatic_input for a in atoms]
    for i, a in enumerate(atoms):
        if arom[i] and i not in ring_atoms:
            raise KekulizationFailure("aromatic atom outside any ring", a.offset)

    has_exo_multiple = [False] * len(atoms)
    for bi, b in enumerate(bonds):
        if orders[bi] > 1:
            has_exo_multiple[b.a] = True
            has_exo_multiple[b.b] = True

    needs = {}
    for i, a in enumerate(atoms):
        if not arom[i]:
            continue
        if has_exo_multiple[i]:
            needs[i] = False
        else:
            needs[i] = _needs_pi_bond(
                a.element, a.charge, sigma_degree[i], (a.hcount or 0) + a.merged_h if a.hcount is not None or a.merged_h else a.hcount
            )

    cand: dict[int, list[tuple[int, int]]] = {i: [] for i, v in needs.items() if v}
    for bi, b in enumerate(bonds):
        if b.symbol not in (None, ":"):
            continue
        if frozenset((b.a, b.b)) not in ring_edges:
            continue
        if needs.get(b.a) and needs.get(b.b):
            cand[b.a].append((b.b, bi))
            cand[b.b].append((b.a, bi))

    unmatched = set(cand)
    matched_bonds: set[int] = set()

    def backtrack() -> bool:
        if not unmatched:
            return True
        u = min(unmatched, key=lambda x: (len([v for v, _ in cand[x] if v in unmatched]), x))
        options = [(v, bi) for v, bi in cand[u] if v in unmatched]
        if not options:
            return False
        unmatched.discard(u)
        for v, bi in options:
            unmatched.discard(v)
            matched_bonds.add(bi)
            if backtrack():
                return True
            matched_bonds.discard(bi)
            unmatched.add(v)
        unmatched.add(u)
        return False

    if not backtrack():
        bad = min(unmatched)
        raise KekulizationFailure(
            "no alternating bond assignment for aromatic ring", atoms[bad].offset
        )
    for bi in matched_bonds:
        orders[bi] = 2
    return orders


# ---------------------------------------------------------------------------
# hydrogen filling and valence checks
# ---------------------------------------------------------------------------


def _fill_hydrogens(
    atoms: list[_ParsedAtom], bond_sums: list[int]
) -> list[int]:
    """Implicit hydrogen counts, raising ValenceViolation on overflow."""
    out: list[int] = []
    for i, a in enumerate(atoms):
        total_bonds = bond_sums[i]
        if a.hcount is not None:
            h = a.hcount + a.merged_h
            allowed = allowed_valences(a.element, a.charge)
            if allowed and total_bonds + h > max(allowed):
                raise ValenceViolation(
                    f"{a.element} with valence {total_bonds + h}", a.offset
                )
            out.append(h)
            continue
        # organic subset: fill to the smallest allowed valence
        allowed = DEFAULT_VALENCES[a.element]
        need = total_bonds + a.merged_h
        fill = None
        for v in allowed:
            if v >= need:
                fill = v - need
                break
        if fill is None:
            raise ValenceViolation(
                f"{a.element} with valence {need}", a.offset
            )
        out.append(fill + a.merged_h)
    return out


# ---------------------------------------------------------------------------
# aromaticity perception
# ---------------------------------------------------------------------------


def _pi_contribution(
    elem: str,
    charge: int,
    connections: int,
    double_partner: int | None,
    n_multiple: int,
    has_triple: bool,
    in_set: Callable[[int], bool],
) -> int | None:
    """Hueckel electron contribution of one ring atom, None if ineligible.

    The table: carbons with an in-ring double bond give 1, with an
    exocyclic double bond 0; pyridine-type N gives 1, pyrrole-type N and
    chalcogen lone pairs give 2; boron and carbenium give an empty
    orbital (0); saturated carbon disqualifies the ring.
    """
    if has_triple or n_multiple > 1 or connections > 3:
        return None
    if double_partner is not None:
        return 1 if in_set(double_partner) else 0
    if elem == "C":
        if charge == -1:
            return 2
        if charge == 1:
            return 0
        return None
    if elem in ("N", "P", "As"):
        return 2 if charge <= 0 else None
    if elem in ("O", "S", "Se", "Te"):
        return 2 if charge <= 0 else None
    if elem == "B":
        return 0 if charge == 0 else None
    return None


def _perceive_aromaticity(
    mol: Molecule, orders: list[int], input_aromatic: list[bool]
) -> tuple[set[int], set[int]]:
    """Aromatic atom and bond-index sets under the 4n+2 model.

    Individual SSSR rings are tested first, then unions of rings inside
    each fused system so that either Kekule structure of e.g. naphthalene
    is recognized. Lowercase input is honored afterwards: any ring made
    entirely of input-aromatic atoms keeps its flags even if the electron
    count model disagrees.
    """
    rings = mol.rings
    if not rings:
        return set(), set()

    ring_edge_sets: list[set[frozenset[int]]] = []
    for ring in rings:
        ring_edge_sets.append(
            {frozenset((x, y)) for x, y in zip(ring, ring[1:] + ring[:1])}
        )
    bond_idx = {frozenset((b.a, b.b)): i for i, b in enumerate(mol.bonds)}

    # per-atom double-bond bookkeeping on the kekule structure
    double_partner: list[int | None] = [None] * len(mol.atoms)
    n_multiple = [0] * len(mol.atoms)
    has_triple = [False] * len(mol.atoms)
    for bi, b in enumerate(mol.bonds):
        if orders[bi] == 2:
            n_multiple[b.a] += 1
            n_multiple[b.b] += 1
            double_partner[b.a] = b.b
            double_partner[b.b] = b.a
        elif orders[bi] == 3:
            has_triple[b.a] = True
            has_triple[b.b] = True

    def try_ring_set(ring_ids: Iterable[int]) -> bool:
        atom_set: set[int] = set()
        for ri in ring_ids:
            atom_set.update(rings[ri])
        member = atom_set.__contains__
        total = 0
        for i in atom_set:
            a = mol.atoms[i]
            c = _pi_contribution(
                a.element,
                a.formal_charge,
                len(mol._adj[i]) + a.implicit_h,
                double_partner[i],
                n_multiple[i],
                has_triple[i],
                member,
            )
            if c is None:
                return False
            total += c
        return total % 4 == 2

    aromatic_atoms: set[int] = set()
    aromatic_bonds: set[int] = set()

    def mark(ring_ids: Iterable[int]) -> None:
        for ri in ring_ids:
            aromatic_atoms.update(rings[ri])
            for edge in ring_edge_sets[ri]:
                aromatic_bonds.add(bond_idx[edge])

    # group rings into fused systems (sharing at least one bond)
    parent = list(range(len(rings)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(len(rings)):
        for j in range(i + 1, len(rings)):
            if ring_edge_sets[i] & ring_edge_sets[j]:
                parent[find(i)] = find(j)
    systems: dict[int, list[int]] = {}
    for i in range(len(rings)):
        systems.setdefault(find(i), []).append(i)

    for members in systems.values():
        done: set[int] = set()
        for ri in members:
            if try_ring_set([ri]):
                mark([ri])
                done.add(ri)
        remaining = [ri for ri in members if ri not in done]
        if remaining and len(members) > 1:
            if len(members) <= 8:
                from itertools import combinations

                found = True
                while found:
                    found = False
                    todo = [ri for ri in members if ri not in done]
                    if not todo:
                        break
                    for size in range(2, len(members) + 1):
                        for combo in combinations(members, size):
                            if all(c in done for c in combo):
                                continue
                            if try_ring_set(combo):
                                mark(combo)
                                done.update(combo)
                                found = True
                                break
                        if found:
                            break
            else:
                if try_ring_set(members):
                    mark(members)

    # honor lowercase input ring by ring
    for ri, ring in enumerate(rings):
        if all(input_aromatic[i] for i in ring):
            mark([ri])
    return aromatic_atoms, aromatic_bonds


# ---------------------------------------------------------------------------
# downstream perception: hybridization, environment, conjugation, rotation
# ---------------------------------------------------------------------------


def _lone_pairs(elem: str, charge: int, bond_order_sum: int) -> int:
    val_e = VALENCE_ELECTRONS.get(elem)
    if val_e is None:
        return 0
    return max(0, (val_e - charge - bond_order_sum) // 2)


def _hybridization(atom: Atom, connections: int, bond_order_sum: int) -> str:
    if atom.aromatic:
        return "sp2"
    if connections == 0:
        return "s"
    if atom.element not in VALENCE_ELECTRONS:
        return "other"
    steric = connections + _lone_pairs(atom.element, atom.formal_charge, bond_order_sum)
    table = {1: "s", 2: "sp", 3: "sp2", 4: "sp3", 5: "sp3d", 6: "sp3d2"}
    return table.get(steric, "other")


def _assign_conjugation(mol: Molecule) -> None:
    n = len(mol.atoms)
    pi_atom = [False] * n
    lone_donor = [False] * n
    order_sum = [0] * n
    for b in mol.bonds:
        order_sum[b.a] += b.kekule_order
        order_sum[b.b] += b.kekule_order
    for i, a in enumerate(mol.atoms):
        order_sum[i] += a.implicit_h
        if a.aromatic:
            pi_atom[i] = True
        if a.element in ("N", "O", "S", "P"):
            if _lone_pairs(a.element, a.formal_charge, order_sum[i]) > 0:
                lone_donor[i] = True
    for b in mol.bonds:
        if b.order in ("double", "triple", "aromatic"):
            pi_atom[b.a] = True
            pi_atom[b.b] = True

    for b in mol.bonds:
        if b.order == "aromatic":
            b.conjugated = True
        elif b.order == "single":
            a, c = b.a, b.b
            if (pi_atom[a] or lone_donor[a]) and (pi_atom[c] or lone_donor[c]):
                b.conjugated = pi_atom[a] or pi_atom[c]
        else:
            # a multiple bond is conjugated when a neighboring atom extends
            # the pi system past this bond
            for end in (b.a, b.b):
                for j in mol.neighbors(end):
                    if j in (b.a, b.b):
                        continue
                    if pi_atom[j] or lone_donor[j]:
                        b.conjugated = True
                        break
                if b.conjugated:
                    break


def _assign_rotatable(mol: Molecule) -> None:
    for b in mol.bonds:
        if b.order != "single" or b.in_ring:
            continue
        if mol.atoms[b.a].degree < 2 or mol.atoms[b.b].degree < 2:
            continue
        if _is_amide_cn(mol, b.a, b.b) or _is_amide_cn(mol, b.b, b.a):
            continue
        b.rotatable = True


def _is_amide_cn(mol: Molecule, c: int, n: int) -> bool:
    if mol.atoms[c].element != "C" or mol.atoms[n].element != "N":
        return False
    for j in mol.neighbors(c):
        bond = mol.bond_between(c, j)
        if bond and bond.order == "double" and mol.atoms[j].element == "O":
            return True
    return False


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def parse_smiles(text: str) -> Molecule:
    """Parse one SMILES string into a fully perceived Molecule.

    Raises subclasses of SmilesError, each carrying the byte offset of
    the offending character in ``text``.
    """
    if text is None:
        raise EmptyInput("empty SMILES", 0)
    patoms, pbonds = _scan(text)
    patoms, pbonds = _merge_explicit_hydrogens(patoms, pbonds)

    n = len(patoms)
    sigma_degree = [0] * n
    for b in pbonds:
        sigma_degree[b.a] += 1
        sigma_degree[b.b] += 1

    rings = find_sssr(n, [(b.a, b.b) for b in pbonds])
    orders = _kekulize(patoms, pbonds, rings, sigma_degree)

    bond_sums = [0] * n
    for bi, b in enumerate(pbonds):
        bond_sums[b.a] += orders[bi]
        bond_sums[b.b] += orders[bi]
    implicit_h = _fill_hydrogens(patoms, bond_sums)

    atoms = [
        Atom(
            element=p.element,
            formal_charge=p.charge,
            implicit_h=implicit_h[i],
            isotope=p.isotope,
        )
        for i, p in enumerate(patoms)
    ]
    bonds = [Bond(a=b.a, b=b.b, kekule_order=orders[bi]) for bi, b in enumerate(pbonds)]
    mol = Molecule(atoms=atoms, bonds=bonds, rings=rings, source_smiles=text.strip())
    mol._build_adjacency()

    ring_edges: set[frozenset[int]] = set()
    for ring in rings:
        for x, y in zip(ring, ring[1:] + ring[:1]):
            ring_edges.add(frozenset((x, y)))
    for b in mol.bonds:
        b.in_ring = frozenset((b.a, b.b)) in ring_edges

    input_arom = [p.aromatic_input for p in patoms]
    arom_atoms, arom_bonds = _perceive_aromaticity(mol, orders, input_arom)
    for i in arom_atoms:
        mol.atoms[i].aromatic = True
    for i, flag in enumerate(input_arom):
        if flag:
            mol.atoms[i].aromatic = True
    for bi, b in enumerate(mol.bonds):
        if bi in arom_bonds:
            b.order = "aromatic"
        else:
            b.order = {1: "single", 2: "double", 3: "triple"}[orders[bi]]

    ring_counts = [0] * n
    for ring in rings:
        for i in ring:
            ring_counts[i] += 1
    for i, a in enumerate(mol.atoms):
        a.degree = len(mol._adj[i])
        a.in_ring = ring_counts[i] > 0
        sizes = [len(r) for r in rings if i in r]
        a.smallest_ring_size = min(sizes) if sizes else 0
        a.env_type = (
            "fused_ring" if ring_counts[i] >= 2 else "ring" if ring_counts[i] else "chain"
        )
        a.hybridization = _hybridization(a, a.degree + a.implicit_h, bond_sums[i] + a.implicit_h)

    _assign_conjugation(mol)
    _assign_rotatable(mol)
    return mol


def bfs_distances(mol: Molecule, sources: Iterable[int]) -> list[int]:
    """Shortest bond-count distance from each atom to the nearest source.

    Unreachable atoms (and every atom when ``sources`` is empty) get -1.
    """
    dist = [-1] * len(mol.atoms)
    frontier = []
    for s in sources:
        dist[s] = 0
        frontier.append(s)
    while frontier:
        nxt: list[int] = []
        for u in frontier:
            for v in mol.neighbors(u):
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------


def write_smiles(mol: Molecule, atom_order: Sequence[int] | None = None) -> str:
    """Serialize a molecule as Kekule SMILES.

    ``atom_order`` is a permutation of atom indices that steers the DFS
    (root choice and branch ordering), which yields alternative spellings
    of the same molecule. Aromaticity is written as alternating bonds and
    re-perceived on parse, so only Hueckel-supported aromatics round-trip
    their flags.
    """
    n = len(mol.atoms)
    if n == 0:
        return ""
    if atom_order is None:
        rank = list(range(n))
    else:
        if sorted(atom_order) != list(range(n)):
            raise ValueError("atom_order must be a permutation of atom indices")
        rank = [0] * n
        for pos, idx in enumerate(atom_order):
            rank[idx] = pos

    visited = [False] * n
    visit_index = [0] * n
    children: list[list[tuple[int, int]]] = [[] for _ in range(n)]  # (child, bond idx)
    back_edges: list[list[tuple[int, int]]] = [[] for _ in range(n)]  # at earlier end
    back_close: list[list[tuple[int, int]]] = [[] for _ in range(n)]  # at later end
    recorded: set[int] = set()
    counter = 0
    roots: list[int] = []

    order_of = lambda i: rank[i]
    bond_sum = [0] * n
    for b in mol.bonds:
        bond_sum[b.a] += b.kekule_order
        bond_sum[b.b] += b.kekule_order

    def dfs(u: int, parent_bond: int) -> None:
        nonlocal counter
        visited[u] = True
        visit_index[u] = counter
        counter += 1
        for v, bi in sorted(mol._adj[u], key=lambda t: order_of(t[0])):
            if bi == parent_bond:
                continue
            if visited[v]:
                # ring bond; opened at whichever end gets emitted first
                if bi not in recorded:
                    recorded.add(bi)
                    first, second = (v, u) if visit_index[v] < visit_index[u] else (u, v)
                    back_edges[first].append((second, bi))
                    back_close[second].append((first, bi))
            else:
                children[u].append((v, bi))
                dfs(v, bi)

    for root in sorted(range(n), key=order_of):
        if not visited[root]:
            roots.append(root)
            dfs(root, -1)

    available: list[int] = list(range(1, 100))
    heapq.heapify(available)
    closure_num: dict[int, int] = {}

    def bond_char(bi: int) -> str:
        return {1: "", 2: "=", 3: "#"}[mol.bonds[bi].kekule_order]

    def atom_token(i: int) -> str:
        a = mol.atoms[i]
        fill = None
        allowed = DEFAULT_VALENCES.get(a.element)
        if allowed and a.formal_charge == 0:
            for v in allowed:
                if v >= bond_sum[i]:
                    fill = v - bond_sum[i]
                    break
        if (
            a.element in ORGANIC_SUBSET
            and a.formal_charge == 0
            and a.isotope == 0
            and fill == a.implicit_h
        ):
            return a.element
        parts = ["["]
        if a.isotope:
            parts.append(str(a.isotope))
        parts.append(a.element)
        if a.implicit_h == 1:
            parts.append("H")
        elif a.implicit_h > 1:
            parts.append(f"H{a.implicit_h}")
        q = a.formal_charge
        if q == 1:
            parts.append("+")
        elif q == -1:
            parts.append("-")
        elif q > 1:
            parts.append(f"+{q}")
        elif q < -1:
            parts.append(f"-{abs(q)}")
        parts.append("]")
        return "".join(parts)

    def closure_token(num: int) -> str:
        return str(num) if num < 10 else f"%{num:02d}"

    out: list[str] = []

    def emit(i: int) -> None:
        out.append(atom_token(i))
        for desc, bi in sorted(back_edges[i], key=lambda t: visit_index[t[0]]):
            num = heapq.heappop(available)
            closure_num[bi] = num
            out.append(bond_char(bi) + closure_token(num))
        for anc, bi in sorted(back_close[i], key=lambda t: closure_num[t[1]]):
            num = closure_num.pop(bi)
            out.append(bond_char(bi) + closure_token(num))
            heapq.heappush(available, num)
        kids = children[i]
        for v, bi in kids[:-1]:
            out.append("(" + bond_char(bi))
            emit(v)
            out.append(")")
        if kids:
            v, bi = kids[-1]
            out.append(bond_char(bi))
            emit(v)

    for k, root in enumerate(roots):
        if k:
            out.append(".")
        emit(root)
    return "".join(out)

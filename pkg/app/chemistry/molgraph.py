'''
Grafo molecular a partir de SMILES

Interpreta um subconjunto prático da gramática SMILES:
- átomos do subconjunto orgânico (B, C, N, O, P, S, F, Cl, Br, I) e formas aromáticas minúsculas
- átomos entre colchetes com isótopo, quiralidade (preservada, não interpretada), H e carga
- ligações - = # : (e / \\ tratadas como simples)
- ramificações, fechamentos de anel 1-9 e %nn

Hidrogênios implícitos NÃO viram átomos; aromaticidade é sintática.
'''

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from app.errors import (
    DisconnectedStructure,
    EmptySmiles,
    UnbalancedBranch,
    UnclosedBracket,
    UnknownSymbol,
    UnmatchedRingBond,
)

# Tabela periódica (índice + 1 = número atômico)
PERIODIC_TABLE = (
    'H', 'He', 'Li', 'Be', 'B', 'C', 'N', 'O', 'F', 'Ne',
    'Na', 'Mg', 'Al', 'Si', 'P', 'S', 'Cl', 'Ar', 'K', 'Ca',
    'Sc', 'Ti', 'V', 'Cr', 'Mn', 'Fe', 'Co', 'Ni', 'Cu', 'Zn',
    'Ga', 'Ge', 'As', 'Se', 'Br', 'Kr', 'Rb', 'Sr', 'Y', 'Zr',
    'Nb', 'Mo', 'Tc', 'Ru', 'Rh', 'Pd', 'Ag', 'Cd', 'In', 'Sn',
    'Sb', 'Te', 'I', 'Xe', 'Cs', 'Ba', 'La', 'Ce', 'Pr', 'Nd',
    'Pm', 'Sm', 'Eu', 'Gd', 'Tb', 'Dy', 'Ho', 'Er', 'Tm', 'Yb',
    'Lu', 'Hf', 'Ta', 'W', 'Re', 'Os', 'Ir', 'Pt', 'Au', 'Hg',
    'Tl', 'Pb', 'Bi', 'Po', 'At', 'Rn', 'Fr', 'Ra', 'Ac', 'Th',
    'Pa', 'U', 'Np', 'Pu', 'Am', 'Cm', 'Bk', 'Cf', 'Es', 'Fm',
    'Md', 'No', 'Lr', 'Rf', 'Db', 'Sg', 'Bh', 'Hs', 'Mt', 'Ds',
    'Rg', 'Cn', 'Nh', 'Fl', 'Mc', 'Lv', 'Ts', 'Og',
)
ATOMIC_NUMBER = {symbol: z for z, symbol in enumerate(PERIODIC_TABLE, start=1)}

ORGANIC_SUBSET = ('Cl', 'Br', 'B', 'C', 'N', 'O', 'P', 'S', 'F', 'I')
AROMATIC_ORGANIC = ('b', 'c', 'n', 'o', 'p', 's')
AROMATIC_BRACKET = ('se', 'as', 'b', 'c', 'n', 'o', 'p', 's')

_BRACKET_RE = re.compile(
    r'^(?P<isotope>\d+)?'
    r'(?P<symbol>[A-Z][a-z]?|se|as|[bcnops])'
    r'(?P<chirality>@@|@(?:TH|AL|SP|TB|OH)\d{1,2}|@)?'
    r'(?P<hcount>H\d?)?'
    r'(?P<charge>\+\+|--|[+-]\d*)?'
    r'(?::\d+)?$'
)


class BondOrder(Enum):
    '''Ordem de ligação; o valor é o código estável usado em chaves e hashes'''
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self):
        '''Contribuição para a valência (aromática conta como 1)'''
        return 1 if self is BondOrder.AROMATIC else self.value

    @property
    def symbol(self):
        return {1: '-', 2: '=', 3: '#', 4: ':'}[self.value]

    @classmethod
    def from_valence(cls, order):
        return {1: cls.SINGLE, 2: cls.DOUBLE, 3: cls.TRIPLE}[order]


_BOND_SYMBOLS = {
    '-': BondOrder.SINGLE,
    '=': BondOrder.DOUBLE,
    '#': BondOrder.TRIPLE,
    ':': BondOrder.AROMATIC,
    '/': BondOrder.SINGLE,
    '\\': BondOrder.SINGLE,
}


@dataclass(frozen=True)
class Atom:
    element: str
    aromatic: bool = False
    charge: int = 0
    explicit_hydrogens: Optional[int] = None
    isotope: Optional[int] = None
    chirality_tag: Optional[str] = None

    @property
    def atomic_number(self):
        return ATOMIC_NUMBER[self.element]


@dataclass(frozen=True)
class Bond:
    begin: int
    end: int
    order: BondOrder = BondOrder.SINGLE

    @property
    def endpoints(self):
        return (self.begin, self.end)

    def other(self, idx):
        return self.end if idx == self.begin else self.begin


@dataclass(frozen=True)
class MolGraph:
    '''Grafo molecular imutável: átomos e ligações em ordem de leitura'''
    atoms: tuple = ()
    bonds: tuple = ()
    _adjacency: tuple = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        adjacency = [[] for _ in self.atoms]
        for bond in self.bonds:
            adjacency[bond.begin].append((bond.end, bond))
            adjacency[bond.end].append((bond.begin, bond))
        object.__setattr__(self, '_adjacency', tuple(tuple(a) for a in adjacency))

    @property
    def n_atoms(self):
        return len(self.atoms)

    @property
    def n_bonds(self):
        return len(self.bonds)

    @property
    def is_empty(self):
        return not self.atoms

    def neighbors(self, idx):
        '''Lista de (vizinho, ligação) do átomo idx'''
        return self._adjacency[idx]

    def degree(self, idx):
        return len(self._adjacency[idx])

    def bond_between(self, i, j):
        for other, bond in self._adjacency[i]:
            if other == j:
                return bond
        return None

    def valence_used(self, idx):
        return sum(bond.order.valence for _, bond in self._adjacency[idx])

    def ring_bonds(self):
        '''Ligações que pertencem a algum ciclo (ligações que não são pontes)'''
        bridges = _find_bridges(self)
        return frozenset(b for b in self.bonds if (min(b.endpoints), max(b.endpoints)) not in bridges)

    def ring_atoms(self):
        atoms = set()
        for bond in self.ring_bonds():
            atoms.update(bond.endpoints)
        return frozenset(atoms)

    def subgraph(self, atom_indices):
        '''Subgrafo induzido, preservando a ordem original de átomos e ligações'''
        keep = sorted(set(atom_indices))
        remap = {old: new for new, old in enumerate(keep)}
        atoms = tuple(self.atoms[i] for i in keep)
        bonds = tuple(
            Bond(remap[b.begin], remap[b.end], b.order)
            for b in self.bonds
            if b.begin in remap and b.end in remap
        )
        return MolGraph(atoms, bonds)

    def is_connected(self):
        if not self.atoms:
            return True
        seen = {0}
        stack = [0]
        while stack:
            current = stack.pop()
            for other, _ in self._adjacency[current]:
                if other not in seen:
                    seen.add(other)
                    stack.append(other)
        return len(seen) == len(self.atoms)


@dataclass(frozen=True)
class ParseTrace:
    graph: MolGraph
    ring_closures: int


def _find_bridges(graph):
    '''Pontes do grafo (Tarjan iterativo); retorna pares (min, max)'''
    n = graph.n_atoms
    disc = [-1] * n
    low = [0] * n
    bridges = set()
    timer = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        # pilha de (átomo, ligação de chegada, iterador de vizinhos)
        stack = [(root, None, iter(graph.neighbors(root)))]
        while stack:
            node, via, it = stack[-1]
            advanced = False
            for other, bond in it:
                if bond is via:
                    continue
                if disc[other] == -1:
                    disc[other] = low[other] = timer
                    timer += 1
                    stack.append((other, bond, iter(graph.neighbors(other))))
                    advanced = True
                    break
                low[node] = min(low[node], disc[other])
            if advanced:
                continue
            stack.pop()
            if stack:
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[node])
                if low[node] > disc[parent]:
                    bridges.add((min(parent, node), max(parent, node)))
    return bridges


def _parse_bracket(content, smiles, position):
    match = _BRACKET_RE.match(content)
    if not match:
        raise UnknownSymbol(f'Átomo entre colchetes inválido [{content}]', smiles, position)

    symbol = match.group('symbol')
    aromatic = symbol in AROMATIC_BRACKET and symbol.islower()
    element = symbol.capitalize() if aromatic else symbol
    if element not in ATOMIC_NUMBER:
        raise UnknownSymbol(f'Elemento desconhecido {symbol!r}', smiles, position)

    hcount = match.group('hcount')
    if hcount is None:
        hydrogens = 0
    else:
        hydrogens = int(hcount[1:]) if len(hcount) > 1 else 1

    charge_text = match.group('charge')
    if not charge_text:
        charge = 0
    elif charge_text in ('++', '--'):
        charge = 2 if charge_text == '++' else -2
    else:
        sign = 1 if charge_text[0] == '+' else -1
        charge = sign * (int(charge_text[1:]) if len(charge_text) > 1 else 1)

    isotope = match.group('isotope')
    isotope = int(isotope) if isotope is not None else None
    if isotope == 0:
        raise UnknownSymbol(f'Isótopo inválido em [{content}]', smiles, position)

    return Atom(
        element=element,
        aromatic=aromatic,
        charge=charge,
        explicit_hydrogens=hydrogens,
        isotope=isotope,
        chirality_tag=match.group('chirality'),
    )


def parse_smiles_with_trace(smiles):
    '''
    Interpretar SMILES retornando também o número de fechamentos de anel consumidos

    Args:
        smiles: string SMILES (ASCII, não vazia)

    Returns:
        ParseTrace com o grafo e a contagem de pares de dígitos de anel

    Raises:
        EmptySmiles, UnknownSymbol, UnclosedBracket, UnbalancedBranch,
        UnmatchedRingBond, DisconnectedStructure
    '''
    if not isinstance(smiles, str) or not smiles:
        raise EmptySmiles('SMILES vazio', smiles)
    if not smiles.isascii():
        raise UnknownSymbol('SMILES contém caracteres não ASCII', smiles)

    atoms = []
    bonds = []
    bonded_pairs = set()
    branch_stack = []
    open_rings = {}  # número do anel -> (átomo, ordem explícita ou None, posição)
    prev = None
    pending_bond = None
    pending_pos = None
    ring_closures = 0

    def add_bond(a, b, order, position):
        key = (min(a, b), max(a, b))
        if a == b or key in bonded_pairs:
            raise UnmatchedRingBond('Ligação duplicada ou anel fechado no mesmo átomo', smiles, position)
        bonded_pairs.add(key)
        bonds.append(Bond(a, b, order))

    def default_order(a, b):
        if atoms[a].aromatic and atoms[b].aromatic:
            return BondOrder.AROMATIC
        return BondOrder.SINGLE

    i = 0
    n = len(smiles)
    while i < n:
        ch = smiles[i]

        if ch == '(':
            if prev is None:
                raise UnbalancedBranch('Ramificação sem átomo anterior', smiles, i)
            if pending_bond is not None:
                raise UnknownSymbol('Ligação pendente antes de "("', smiles, pending_pos)
            if i + 1 < n and smiles[i + 1] == ')':
                raise UnbalancedBranch('Ramificação vazia', smiles, i)
            branch_stack.append(prev)
            i += 1
            continue

        if ch == ')':
            if not branch_stack:
                raise UnbalancedBranch('")" sem "(" correspondente', smiles, i)
            if pending_bond is not None:
                raise UnknownSymbol('Ligação pendente antes de ")"', smiles, pending_pos)
            prev = branch_stack.pop()
            i += 1
            continue

        if ch == '.':
            raise DisconnectedStructure('Componentes desconectados não são suportados', smiles, i)

        if ch in _BOND_SYMBOLS:
            if pending_bond is not None or prev is None:
                raise UnknownSymbol(f'Símbolo de ligação inesperado {ch!r}', smiles, i)
            pending_bond = _BOND_SYMBOLS[ch]
            pending_pos = i
            i += 1
            continue

        if ch.isdigit() or ch == '%':
            start = i
            if ch == '%':
                digits = smiles[i + 1:i + 3]
                if len(digits) != 2 or not digits.isdigit():
                    raise UnknownSymbol('Fechamento de anel %nn malformado', smiles, i)
                ring_num = int(digits)
                i += 3
            else:
                ring_num = int(ch)
                i += 1
            if prev is None:
                raise UnmatchedRingBond('Dígito de anel sem átomo anterior', smiles, start)

            if ring_num in open_rings:
                other, open_order, _ = open_rings.pop(ring_num)
                if open_order is not None and pending_bond is not None and open_order != pending_bond:
                    raise UnmatchedRingBond(f'Ordens conflitantes no anel {ring_num}', smiles, start)
                order = pending_bond or open_order or default_order(other, prev)
                add_bond(other, prev, order, start)
                ring_closures += 1
            else:
                open_rings[ring_num] = (prev, pending_bond, start)
            pending_bond = None
            continue

        # Átomos
        if ch == '[':
            close = smiles.find(']', i + 1)
            if close == -1:
                raise UnclosedBracket('Colchete "[" sem "]"', smiles, i)
            atom = _parse_bracket(smiles[i + 1:close], smiles, i)
            next_i = close + 1
        elif smiles.startswith(('Cl', 'Br'), i):
            atom = Atom(element=smiles[i:i + 2])
            next_i = i + 2
        elif ch in ORGANIC_SUBSET:
            atom = Atom(element=ch)
            next_i = i + 1
        elif ch in AROMATIC_ORGANIC:
            atom = Atom(element=ch.upper(), aromatic=True)
            next_i = i + 1
        else:
            raise UnknownSymbol(f'Símbolo desconhecido {ch!r}', smiles, i)

        atoms.append(atom)
        current = len(atoms) - 1
        if prev is not None:
            add_bond(prev, current, pending_bond or default_order(prev, current), i)
        pending_bond = None
        prev = current
        i = next_i

    if pending_bond is not None:
        raise UnknownSymbol('Ligação pendente no fim da string', smiles, pending_pos)
    if branch_stack:
        raise UnbalancedBranch('"(" sem ")" correspondente', smiles, n)
    if open_rings:
        ring_num, (_, _, position) = next(iter(open_rings.items()))
        raise UnmatchedRingBond(f'Anel {ring_num} não fechado', smiles, position)

    return ParseTrace(MolGraph(tuple(atoms), tuple(bonds)), ring_closures)


def parse_smiles(smiles):
    '''Interpretar SMILES e retornar o MolGraph'''
    return parse_smiles_with_trace(smiles).graph

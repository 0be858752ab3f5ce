'''
SELFIES: codificação e decodificação com restrição de valência

Alfabeto reduzido:
- átomos C, N, O, S, P, F, Cl, Br, I, B com prefixo de ligação (nenhum, =, #)
- variantes carregadas [N+1], [N-1], [O+1], [O-1]
- [BranchN] / [RingN] com N em {1, 2}, prefixos = e #, seguidos de N símbolos de índice (base 16)

Qualquer sequência do alfabeto decodifica para uma molécula que respeita
a tabela de valências; o único erro de decodificação é símbolo desconhecido.
'''

import logging
import re
from dataclasses import dataclass, field

from app.chemistry.molgraph import Atom, Bond, BondOrder, MolGraph, parse_smiles
from app.errors import (
    KekulizationFailed,
    SmilesParseError,
    UnknownToken,
    UnsupportedFeature,
)

logger = logging.getLogger(__name__)

# Capacidade máxima de ligações por (elemento, carga)
VALENCE_TABLE = {
    ('C', 0): 4,
    ('N', 0): 3,
    ('O', 0): 2,
    ('S', 0): 6,
    ('P', 0): 5,
    ('F', 0): 1,
    ('Cl', 0): 1,
    ('Br', 0): 1,
    ('I', 0): 1,
    ('B', 0): 3,
    ('N', 1): 4,
    ('N', -1): 2,
    ('O', 1): 3,
    ('O', -1): 1,
}

ELEMENTS = ('C', 'N', 'O', 'S', 'P', 'F', 'Cl', 'Br', 'I', 'B')
BOND_PREFIXES = {'': 1, '=': 2, '#': 3}
_PREFIX_FOR_ORDER = {1: '', 2: '=', 3: '#'}

# Alfabeto de índices (16 símbolos, valor = posição)
INDEX_ALPHABET = (
    '[C]', '[Ring1]', '[Ring2]', '[Branch1]', '[=Branch1]', '[#Branch1]',
    '[Branch2]', '[=Branch2]', '[#Branch2]', '[O]', '[N]', '[=N]', '[=C]',
    '[#C]', '[S]', '[P]',
)
INDEX_VALUE = {symbol: value for value, symbol in enumerate(INDEX_ALPHABET)}
INDEX_BASE = len(INDEX_ALPHABET)

_TOKEN_RE = re.compile(r'\[[^\[\]]*\]')
_ATOM_RE = re.compile(r'^\[(?P<bond>[=#]?)(?P<element>Cl|Br|[CNOSPFIB])(?P<charge>[+-]1)?\]$')
_BRANCH_RE = re.compile(r'^\[(?P<bond>[=#]?)Branch(?P<n>[12])\]$')
_RING_RE = re.compile(r'^\[(?P<bond>[=#]?)Ring(?P<n>[12])\]$')


def _charge_suffix(charge):
    return '' if charge == 0 else f'{charge:+d}'


def selfies_alphabet():
    '''Todos os símbolos do alfabeto, em ordem estável'''
    symbols = []
    for prefix in BOND_PREFIXES:
        for (element, charge) in VALENCE_TABLE:
            symbols.append(f'[{prefix}{element}{_charge_suffix(charge)}]')
    for prefix in BOND_PREFIXES:
        for n in (1, 2):
            symbols.append(f'[{prefix}Branch{n}]')
            symbols.append(f'[{prefix}Ring{n}]')
    return tuple(symbols)


ALPHABET = frozenset(selfies_alphabet())


@dataclass(frozen=True)
class SelfiesString:
    tokens: tuple = ()

    def __str__(self):
        return ''.join(self.tokens)

    def __len__(self):
        return len(self.tokens)


def split_selfies(text):
    '''Separar "[C][C][O]" em símbolos; resíduos fora de colchetes são erro'''
    tokens = []
    position = 0
    for match in _TOKEN_RE.finditer(text):
        if match.start() != position:
            raise UnknownToken(f'Texto fora de símbolo SELFIES na posição {position}: {text[position:match.start()]!r}')
        tokens.append(match.group())
        position = match.end()
    if position != len(text):
        raise UnknownToken(f'Texto fora de símbolo SELFIES na posição {position}: {text[position:]!r}')
    return SelfiesString(tuple(tokens))


def capacity(element, charge):
    return VALENCE_TABLE.get((element, charge))


def valence_ok(graph):
    '''Verdadeiro se cada átomo respeita a tabela de valências'''
    for idx, atom in enumerate(graph.atoms):
        cap = capacity(atom.element, atom.charge)
        if cap is None or graph.valence_used(idx) > cap:
            return False
    return True


# ============================================================================
# DECODIFICAÇÃO
# ============================================================================

class _Derivation:
    '''Estado mutável de uma decodificação'''

    def __init__(self):
        self.atoms = []
        self.capacities = []
        self.bond_orders = {}  # (min, max) -> ordem inteira
        self.bond_sequence = []
        self.rings = []

    def add_atom(self, element, charge):
        self.atoms.append(Atom(element=element, charge=charge))
        self.capacities.append(VALENCE_TABLE[(element, charge)])
        return len(self.atoms) - 1

    def add_bond(self, a, b, order):
        key = (min(a, b), max(a, b))
        if key not in self.bond_orders:
            self.bond_sequence.append(key)
            self.bond_orders[key] = 0
        self.bond_orders[key] += order

    def free_valence(self, idx):
        used = sum(order for key, order in self.bond_orders.items() if idx in key)
        return self.capacities[idx] - used

    def graph(self):
        bonds = tuple(
            Bond(a, b, BondOrder.from_valence(self.bond_orders[(a, b)]))
            for a, b in self.bond_sequence
        )
        return MolGraph(tuple(self.atoms), bonds)


def _classify(token):
    match = _ATOM_RE.match(token)
    if match:
        charge = int(match.group('charge')) if match.group('charge') else 0
        if (match.group('element'), charge) in VALENCE_TABLE:
            return 'atom', (BOND_PREFIXES[match.group('bond')], match.group('element'), charge)
    match = _BRANCH_RE.match(token)
    if match:
        return 'branch', (BOND_PREFIXES[match.group('bond')], int(match.group('n')))
    match = _RING_RE.match(token)
    if match:
        return 'ring', (BOND_PREFIXES[match.group('bond')], int(match.group('n')))
    raise UnknownToken(f'Símbolo SELFIES desconhecido {token!r}')


def _read_index(tokens, position, end, n_symbols):
    '''Lê n símbolos de índice (base 16); símbolos ausentes contam como 0'''
    value = 0
    for _ in range(n_symbols):
        digit = INDEX_VALUE.get(tokens[position], 0) if position < end else 0
        value = value * INDEX_BASE + digit
        position = min(position + 1, end)
    return value, position


def _derive(tokens, start, end, state, prev, derivation):
    '''
    Deriva símbolos tokens[start:end] a partir do átomo prev

    state: valência restante de prev (None quando ainda não há átomo)
    '''
    position = start
    while position < end and (state is None or state > 0):
        kind, payload = _classify(tokens[position])
        position += 1

        if kind == 'atom':
            requested, element, charge = payload
            cap = VALENCE_TABLE[(element, charge)]
            current = derivation.add_atom(element, charge)
            if prev is None:
                bond = 0
            else:
                bond = min(requested, state, cap)
                derivation.add_bond(prev, current, bond)
            prev = current
            state = cap - bond

        elif kind == 'branch':
            btype, n_symbols = payload
            if prev is None or state <= 1:
                continue
            length, position = _read_index(tokens, position, end, n_symbols)
            body_end = min(position + length + 1, end)
            branch_state = min(state - 1, btype)
            _derive(tokens, position, body_end, branch_state, prev, derivation)
            position = body_end
            state -= branch_state

        else:  # ring
            rtype, n_symbols = payload
            if prev is None:
                continue
            distance, position = _read_index(tokens, position, end, n_symbols)
            order = min(rtype, state)
            target = max(0, prev - (distance + 1))
            derivation.rings.append((target, prev, order))
            state -= order


def decode_selfies(selfies):
    '''
    Decodificar SELFIES em MolGraph válido

    Args:
        selfies: SelfiesString, lista de símbolos ou string concatenada

    Returns:
        MolGraph respeitando a tabela de valências

    Raises:
        UnknownToken: símbolo fora do alfabeto
    '''
    if isinstance(selfies, str):
        tokens = split_selfies(selfies).tokens
    elif isinstance(selfies, SelfiesString):
        tokens = selfies.tokens
    else:
        tokens = tuple(selfies)

    for token in tokens:
        _classify(token)

    derivation = _Derivation()
    _derive(tokens, 0, len(tokens), None, None, derivation)

    # Anéis formados ao final, limitados pela valência livre das duas pontas
    for target, source, order in derivation.rings:
        if target == source:
            continue
        key = (min(target, source), max(target, source))
        existing = derivation.bond_orders.get(key, 0)
        order = min(order, derivation.free_valence(target), derivation.free_valence(source), 3 - existing)
        if order > 0:
            derivation.add_bond(target, source, order)

    return derivation.graph()


# ============================================================================
# CODIFICAÇÃO
# ============================================================================

def _encode_index(value, n_symbols):
    digits = []
    for _ in range(n_symbols):
        digits.append(INDEX_ALPHABET[value % INDEX_BASE])
        value //= INDEX_BASE
    return list(reversed(digits))


def _index_width(value):
    if value < INDEX_BASE:
        return 1
    if value < INDEX_BASE ** 2:
        return 2
    return None


def _check_encodable(graph):
    for idx, atom in enumerate(graph.atoms):
        if atom.aromatic:
            raise UnsupportedFeature('Átomos aromáticos devem ser kekulizados antes da codificação')
        cap = capacity(atom.element, atom.charge)
        if cap is None:
            raise UnsupportedFeature(
                f'Elemento/carga fora do alfabeto: {atom.element}{_charge_suffix(atom.charge)}'
            )
        if graph.valence_used(idx) > cap:
            raise UnsupportedFeature(f'Átomo {idx} ({atom.element}) excede a valência {cap}')
    for bond in graph.bonds:
        if bond.order is BondOrder.AROMATIC:
            raise UnsupportedFeature('Ligações aromáticas devem ser kekulizadas antes da codificação')
    if not graph.is_connected():
        raise UnsupportedFeature('Grafo desconectado')


def _spanning_tree(graph):
    '''Árvore DFS a partir do átomo 0: ordem de visita, filhos e arestas de retorno'''
    order = {0: 0}
    children = {i: [] for i in range(graph.n_atoms)}
    tree_bonds = set()

    stack = [(0, iter(graph.neighbors(0)))]
    while stack:
        atom, pending = stack[-1]
        for other, bond in pending:
            if other not in order:
                order[other] = len(order)
                tree_bonds.add(id(bond))
                children[atom].append((other, bond))
                stack.append((other, iter(graph.neighbors(other))))
                break
        else:
            stack.pop()

    back_edges = {i: [] for i in range(graph.n_atoms)}
    for bond in graph.bonds:
        if id(bond) in tree_bonds:
            continue
        early, late = sorted(bond.endpoints, key=order.__getitem__)
        back_edges[late].append((early, bond))
    return order, children, back_edges


def encode_selfies(graph):
    '''
    Codificar MolGraph (kekulizado) em SELFIES

    Raises:
        UnsupportedFeature: aromaticidade, elemento/carga fora do alfabeto,
            valência excedida ou ramificação/anel longo demais
    '''
    if graph.is_empty:
        return SelfiesString(())
    _check_encodable(graph)
    order, children, back_edges = _spanning_tree(graph)

    incoming = {0: 1}
    for kids in children.values():
        for child, bond in kids:
            incoming[child] = bond.order.value

    def head(atom):
        data = graph.atoms[atom]
        tokens = [f'[{_PREFIX_FOR_ORDER[incoming[atom]]}{data.element}{_charge_suffix(data.charge)}]']
        for early, bond in sorted(back_edges[atom], key=lambda item: order[item[0]]):
            distance = order[atom] - order[early] - 1
            width = _index_width(distance)
            if width is None:
                raise UnsupportedFeature('Anel longo demais para dois símbolos de índice')
            tokens.append(f'[{_PREFIX_FOR_ORDER[bond.order.value]}Ring{width}]')
            tokens.extend(_encode_index(distance, width))
        return tokens

    # tamanho de cada subárvore, das folhas para a raiz
    heads = {atom: head(atom) for atom in order}
    sizes, branch_headers = {}, {}
    for atom in sorted(order, key=order.__getitem__, reverse=True):
        kids = children[atom]
        size = len(heads[atom])
        for child, bond in kids[:-1]:
            width = _index_width(sizes[child] - 1)
            if width is None:
                raise UnsupportedFeature('Ramificação longa demais para dois símbolos de índice')
            header = [f'[{_PREFIX_FOR_ORDER[bond.order.value]}Branch{width}]', *_encode_index(sizes[child] - 1, width)]
            branch_headers[child] = header
            size += len(header) + sizes[child]
        if kids:
            size += sizes[kids[-1][0]]
        sizes[atom] = size

    tokens = []
    stack = [('atom', 0)]
    while stack:
        kind, item = stack.pop()
        if kind == 'tokens':
            tokens.extend(item)
            continue
        tokens.extend(heads[item])
        kids = children[item]
        pending = []
        for child, _ in kids[:-1]:
            pending += [('tokens', branch_headers[child]), ('atom', child)]
        if kids:
            pending.append(('atom', kids[-1][0]))
        stack.extend(reversed(pending))
    return SelfiesString(tuple(tokens))


# ============================================================================
# KEKULIZAÇÃO
# ============================================================================

_KEKULE_STEP_BUDGET = 100_000


def _needs_pi_bond(graph, idx):
    atom = graph.atoms[idx]
    if not atom.aromatic:
        return False
    if atom.element in ('O', 'S', 'Se'):
        return False
    if atom.element in ('N', 'P'):
        # pirrol: [nH], n substituído ou ânion não contribuem com ligação dupla
        if (atom.explicit_hydrogens or 0) > 0 or atom.charge < 0:
            return False
        if atom.charge == 0 and graph.degree(idx) >= 3:
            return False
    # ligação dupla exocíclica já satisfaz o átomo
    return not any(bond.order is BondOrder.DOUBLE for _, bond in graph.neighbors(idx))


def kekulize(graph):
    '''
    Atribuir ligações simples/duplas alternadas aos sistemas aromáticos

    Procura um emparelhamento perfeito entre os átomos aromáticos que precisam
    de ligação pi, usando apenas ligações aromáticas (backtracking com orçamento).

    Raises:
        KekulizationFailed: quando não há atribuição válida
    '''
    if not any(atom.aromatic for atom in graph.atoms):
        return graph

    needy = [i for i in range(graph.n_atoms) if _needs_pi_bond(graph, i)]
    needy_set = set(needy)
    candidates = {
        i: sorted(
            other for other, bond in graph.neighbors(i)
            if bond.order is BondOrder.AROMATIC and other in needy_set
        )
        for i in needy
    }
    mate = {}
    budget = [_KEKULE_STEP_BUDGET]

    def solve(pending):
        budget[0] -= 1
        if budget[0] < 0:
            raise KekulizationFailed('Orçamento de busca esgotado na kekulização')
        pending = [i for i in pending if i not in mate]
        if not pending:
            return True
        # átomo mais restrito primeiro
        atom = min(pending, key=lambda i: (sum(1 for o in candidates[i] if o not in mate), i))
        for other in candidates[atom]:
            if other in mate:
                continue
            mate[atom], mate[other] = other, atom
            if solve(pending):
                return True
            del mate[atom], mate[other]
        return False

    if not solve(needy):
        raise KekulizationFailed('Sistema aromático sem estrutura de Kekulé')

    atoms = tuple(
        Atom(a.element, False, a.charge, a.explicit_hydrogens, a.isotope, a.chirality_tag)
        for a in graph.atoms
    )
    bonds = []
    for bond in graph.bonds:
        if bond.order is BondOrder.AROMATIC:
            double = mate.get(bond.begin) == bond.end
            bonds.append(Bond(bond.begin, bond.end, BondOrder.DOUBLE if double else BondOrder.SINGLE))
        else:
            bonds.append(bond)
    return MolGraph(atoms, tuple(bonds))


# ============================================================================
# CONVERSÃO DE CORPUS
# ============================================================================

@dataclass
class SkipReport:
    converted: int = 0
    skipped: list = field(default_factory=list)  # (linha, smiles, motivo)

    @property
    def n_skipped(self):
        return len(self.skipped)

    def to_dict(self):
        return {
            'converted': self.converted,
            'skipped': [
                {'line': line, 'smiles': smiles, 'reason': reason}
                for line, smiles, reason in self.skipped
            ],
        }


def smiles_to_selfies(smiles):
    '''SMILES -> SELFIES (interpreta, kekuliza e codifica)'''
    return encode_selfies(kekulize(parse_smiles(smiles)))


def iter_selfies(lines, report):
    '''Gera strings SELFIES; linhas não convertíveis vão para o relatório'''
    for line_no, raw in enumerate(lines, start=1):
        smiles = raw.strip()
        if not smiles:
            continue
        try:
            selfies = smiles_to_selfies(smiles)
        except (SmilesParseError, UnsupportedFeature) as e:
            report.skipped.append((line_no, smiles, str(e)))
            logger.debug('[SELFIES] Linha %d ignorada: %s', line_no, e)
            continue
        report.converted += 1
        yield str(selfies)


def corpus_to_selfies(lines):
    '''
    Converter um fluxo de SMILES em SELFIES

    Returns:
        (lista de strings SELFIES, SkipReport)
    '''
    report = SkipReport()
    converted = list(iter_selfies(lines, report))
    if report.n_skipped:
        logger.info('[SELFIES] %d convertidas, %d ignoradas', report.converted, report.n_skipped)
    return converted, report

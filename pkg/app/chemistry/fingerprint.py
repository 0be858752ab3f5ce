'''
Fingerprint circular (estilo Morgan) com hash de 64 bits

Invariante inicial por átomo: (número atômico, grau, carga, aromático).
A cada raio o identificador do átomo é combinado com os pares
(ordem de ligação, identificador do vizinho) ordenados; cada identificador
liga o bit (identificador mod largura).

Hash: finalizador splitmix64 com semente fixa, reprodutível bit a bit.
'''

from dataclasses import dataclass

import numpy as np

from app.errors import InvalidFingerprintWidth

MASK64 = (1 << 64) - 1
HASH_SEED = 0x5EED_C0DE_2020_0772
DEFAULT_RADIUS = 2
DEFAULT_WIDTH = 2048


def mix64(value):
    '''Finalizador splitmix64'''
    z = (value + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def hash_sequence(values, seed=HASH_SEED):
    h = seed & MASK64
    for value in values:
        h = mix64(h ^ (value & MASK64))
    return h


@dataclass(frozen=True)
class Fingerprint:
    bits: np.ndarray
    radius: int = DEFAULT_RADIUS

    @property
    def width(self):
        return int(self.bits.shape[0])

    @property
    def popcount(self):
        return int(self.bits.sum())

    def on_bits(self):
        return tuple(int(i) for i in np.flatnonzero(self.bits))

    def to_numpy(self, dtype=np.float64):
        return self.bits.astype(dtype)

    def tanimoto(self, other):
        both = int(np.logical_and(self.bits, other.bits).sum())
        either = int(np.logical_or(self.bits, other.bits).sum())
        return 1.0 if either == 0 else both / either

    def __eq__(self, other):
        if not isinstance(other, Fingerprint):
            return NotImplemented
        return self.radius == other.radius and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash((self.radius, self.on_bits()))


def _initial_identifier(graph, idx):
    atom = graph.atoms[idx]
    # carga deslocada para ficar não negativa
    return hash_sequence((atom.atomic_number, graph.degree(idx), atom.charge + 128, int(atom.aromatic)))


def atom_identifiers(graph, radius):
    '''Identificadores por raio: lista [raio][átomo]'''
    shells = [[_initial_identifier(graph, i) for i in range(graph.n_atoms)]]
    for r in range(1, radius + 1):
        previous = shells[-1]
        current = []
        for i in range(graph.n_atoms):
            neighborhood = sorted((bond.order.value, previous[other]) for other, bond in graph.neighbors(i))
            flat = [r, previous[i]]
            for code, ident in neighborhood:
                flat.extend((code, ident))
            current.append(hash_sequence(flat))
        shells.append(current)
    return shells


def morgan_fingerprint(graph, radius=DEFAULT_RADIUS, width=DEFAULT_WIDTH):
    '''
    Fingerprint circular com hash

    Args:
        graph: MolGraph
        radius: raio máximo (>= 0)
        width: número de bits (potência de dois)

    Returns:
        Fingerprint
    '''
    if radius < 0:
        raise ValueError('O raio deve ser não negativo')
    if width <= 0 or width & (width - 1):
        raise InvalidFingerprintWidth(f'Largura {width} não é potência de dois')

    bits = np.zeros(width, dtype=np.uint8)
    for shell in atom_identifiers(graph, radius):
        for ident in shell:
            bits[ident % width] = 1
    return Fingerprint(bits=bits, radius=radius)

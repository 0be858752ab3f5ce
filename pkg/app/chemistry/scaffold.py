'''
Scaffolds de Bemis–Murcko e chave canônica de grafos

murcko_scaffold: remove iterativamente átomos terminais fora de anéis.
scaffold_key: rótulo canônico por refinamento de Morgan com desempate
lexicográfico; grafos isomorfos produzem a mesma chave.
'''

from app.chemistry.molgraph import MolGraph, parse_smiles


def murcko_scaffold(graph):
    '''
    Scaffold de Bemis–Murcko (sistemas de anéis + ligantes acíclicos entre eles)

    Args:
        graph: MolGraph interpretado

    Returns:
        MolGraph do scaffold (vazio para moléculas acíclicas)
    '''
    if graph.is_empty:
        return graph

    ring_atoms = graph.ring_atoms()
    alive = set(range(graph.n_atoms))
    degree = {i: graph.degree(i) for i in alive}

    frontier = [i for i in alive if degree[i] <= 1 and i not in ring_atoms]
    while frontier:
        atom = frontier.pop()
        if atom not in alive:
            continue
        alive.discard(atom)
        for other, _ in graph.neighbors(atom):
            if other in alive:
                degree[other] -= 1
                if degree[other] <= 1 and other not in ring_atoms:
                    frontier.append(other)

    if len(alive) == graph.n_atoms:
        return graph
    return graph.subgraph(alive)


def _atom_invariant(graph, idx):
    atom = graph.atoms[idx]
    return (atom.element, graph.degree(idx), atom.charge, atom.aromatic)


def _dense_ranks(values):
    ordered = sorted(set(values))
    lookup = {value: rank for rank, value in enumerate(ordered)}
    return [lookup[value] for value in values]


def _refine(graph, ranks):
    '''Refinamento de Morgan até o número de classes estabilizar'''
    n_classes = len(set(ranks))
    while True:
        signatures = [
            (ranks[i], tuple(sorted((bond.order.value, ranks[other]) for other, bond in graph.neighbors(i))))
            for i in range(graph.n_atoms)
        ]
        new_ranks = _dense_ranks(signatures)
        new_classes = len(set(new_ranks))
        if new_classes == n_classes:
            return new_ranks
        ranks, n_classes = new_ranks, new_classes


def canonical_ranks(graph):
    '''
    Ranking canônico dos átomos (permutação 0..n-1)

    Invariantes iniciais: (elemento, grau, carga, aromático).
    Empates restantes são quebrados promovendo o átomo de menor índice
    da primeira classe empatada, seguido de novo refinamento.
    '''
    n = graph.n_atoms
    if n == 0:
        return []
    ranks = _refine(graph, _dense_ranks([_atom_invariant(graph, i) for i in range(n)]))
    while len(set(ranks)) < n:
        counts = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        chosen = min(i for i in range(n) if ranks[i] == tied)
        # O átomo escolhido fica à frente da sua classe
        ranks = [2 * r + (0 if (r == tied and i == chosen) or r != tied else 1) for i, r in enumerate(ranks)]
        ranks = _refine(graph, _dense_ranks(ranks))
    return ranks


def scaffold_key(graph):
    '''
    Chave canônica determinística do grafo

    Returns:
        string vazia para grafo vazio; caso contrário átomos em ordem canônica
        seguidos das arestas ordenadas, ex.: "C,0,1;C,0,1;C,0,1|0-1:4;..."
    '''
    if graph.is_empty:
        return ''
    ranks = canonical_ranks(graph)
    order = sorted(range(graph.n_atoms), key=lambda i: ranks[i])
    atom_part = ';'.join(
        f'{graph.atoms[i].element},{graph.atoms[i].charge},{int(graph.atoms[i].aromatic)}'
        for i in order
    )
    edges = sorted(
        (min(ranks[b.begin], ranks[b.end]), max(ranks[b.begin], ranks[b.end]), b.order.value)
        for b in graph.bonds
    )
    edge_part = ';'.join(f'{a}-{b}:{o}' for a, b, o in edges)
    return f'{atom_part}|{edge_part}'


canonical_key = scaffold_key


def smiles_scaffold_key(smiles):
    '''Chave do scaffold de Murcko de uma string SMILES'''
    return scaffold_key(murcko_scaffold(parse_smiles(smiles)))


def graphs_isomorphic(first, second):
    '''Isomorfismo (elemento, carga, aromaticidade, ordem de ligação) via chave canônica'''
    return scaffold_key(first) == scaffold_key(second)


__all__ = [
    'MolGraph',
    'canonical_key',
    'canonical_ranks',
    'graphs_isomorphic',
    'murcko_scaffold',
    'scaffold_key',
    'smiles_scaffold_key',
]

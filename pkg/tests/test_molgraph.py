import unittest

import numpy as np

from app.chemistry.fingerprint import morgan_fingerprint
from app.chemistry.molgraph import BondOrder, parse_smiles, parse_smiles_with_trace
from app.chemistry.scaffold import graphs_isomorphic, murcko_scaffold, scaffold_key, smiles_scaffold_key
from app.errors import (
    DisconnectedStructure,
    EmptySmiles,
    InvalidFingerprintWidth,
    SmilesParseError,
    UnbalancedBranch,
    UnclosedBracket,
    UnknownSymbol,
    UnmatchedRingBond,
)


class TestParseSmiles(unittest.TestCase):
    '''Testes do interpretador SMILES'''

    def test_ethanol(self):
        '''Etanol: 3 átomos pesados, 2 ligações simples'''
        g = parse_smiles('CCO')
        self.assertEqual([a.element for a in g.atoms], ['C', 'C', 'O'])
        self.assertEqual(g.n_bonds, 2)
        self.assertTrue(all(b.order is BondOrder.SINGLE for b in g.bonds))

    def test_benzene_ring_closure(self):
        '''Benzeno: 6 ligações aromáticas e um fechamento de anel'''
        trace = parse_smiles_with_trace('c1ccccc1')
        self.assertEqual(trace.ring_closures, 1)
        self.assertEqual(trace.graph.n_bonds, 6)
        self.assertTrue(all(b.order is BondOrder.AROMATIC for b in trace.graph.bonds))
        self.assertEqual(len(trace.graph.ring_atoms()), 6)

    def test_bond_symbols(self):
        '''Ligações dupla e tripla explícitas'''
        g = parse_smiles('C=CC#N')
        orders = [b.order for b in g.bonds]
        self.assertEqual(orders, [BondOrder.DOUBLE, BondOrder.SINGLE, BondOrder.TRIPLE])

    def test_branches(self):
        '''Ramificações ligam ao átomo anterior ao "("'''
        g = parse_smiles('CC(C)(C)C')
        self.assertEqual(g.degree(1), 4)

    def test_bracket_atom(self):
        '''Átomo entre colchetes com carga e hidrogênios'''
        g = parse_smiles('C[NH3+]')
        atom = g.atoms[1]
        self.assertEqual(atom.element, 'N')
        self.assertEqual(atom.charge, 1)
        self.assertEqual(atom.explicit_hydrogens, 3)

    def test_two_letter_halogens(self):
        '''Cl e Br são átomos únicos'''
        g = parse_smiles('ClCBr')
        self.assertEqual([a.element for a in g.atoms], ['Cl', 'C', 'Br'])

    def test_directional_bonds_are_single(self):
        '''"/" e "\\" contam como ligações simples'''
        g = parse_smiles('F/C=C/F')
        self.assertEqual([b.order for b in g.bonds],
                         [BondOrder.SINGLE, BondOrder.DOUBLE, BondOrder.SINGLE])

    def test_errors(self):
        '''Cada defeito gera o erro tipado correspondente'''
        cases = {
            'C1CC': UnmatchedRingBond,
            'C(C': UnbalancedBranch,
            'CC)': UnbalancedBranch,
            'C[NH4': UnclosedBracket,
            'CXC': UnknownSymbol,
            'CC.O': DisconnectedStructure,
            '': EmptySmiles,
        }
        for smiles, error in cases.items():
            with self.subTest(smiles=smiles):
                with self.assertRaises(error):
                    parse_smiles(smiles)

    def test_error_position(self):
        '''Erros carregam a posição do defeito'''
        with self.assertRaises(UnknownSymbol) as ctx:
            parse_smiles('CCX')
        self.assertEqual(ctx.exception.position, 2)

    def test_fuzz_never_crashes(self):
        '''Strings aleatórias: grafo ou SmilesParseError, nunca outra exceção'''
        alphabet = list('CNOcn()=#123[]+-.Xl')
        rng = np.random.default_rng(7)
        for _ in range(2000):
            text = ''.join(rng.choice(alphabet, size=rng.integers(1, 12)))
            try:
                parse_smiles(text)
            except SmilesParseError:
                pass

    def test_ring_closure_conservation(self):
        '''Ligações = átomos - 1 + fechamentos de anel (grafo conexo)'''
        for smiles in ('c1ccc2ccccc2c1', 'C1CC1', 'CC(C)O', 'C1CCC2(CC1)CC2'):
            trace = parse_smiles_with_trace(smiles)
            with self.subTest(smiles=smiles):
                self.assertEqual(trace.graph.n_bonds, trace.graph.n_atoms - 1 + trace.ring_closures)


class TestScaffold(unittest.TestCase):
    '''Testes de scaffold de Murcko e chave canônica'''

    def test_acyclic_scaffold_is_empty(self):
        '''Molécula acíclica: scaffold vazio e chave ""'''
        scaffold = murcko_scaffold(parse_smiles('CCCO'))
        self.assertTrue(scaffold.is_empty)
        self.assertEqual(scaffold_key(scaffold), '')

    def test_side_chains_removed(self):
        '''Cadeias laterais saem, o anel fica'''
        self.assertEqual(smiles_scaffold_key('c1ccccc1CCN'), smiles_scaffold_key('c1ccccc1'))

    def test_linker_kept(self):
        '''Ligante entre anéis faz parte do scaffold'''
        scaffold = murcko_scaffold(parse_smiles('c1ccccc1CCc1ccccc1C'))
        self.assertEqual(scaffold.n_atoms, 14)

    def test_idempotent(self):
        '''murcko(murcko(g)) == murcko(g) pela chave canônica'''
        g = parse_smiles('CC1CCC(CC1)c1ccccc1O')
        once = murcko_scaffold(g)
        self.assertEqual(scaffold_key(murcko_scaffold(once)), scaffold_key(once))

    def test_key_independent_of_atom_order(self):
        '''Mesma molécula escrita de formas diferentes, mesma chave'''
        self.assertEqual(scaffold_key(parse_smiles('OCC')), scaffold_key(parse_smiles('CCO')))
        self.assertTrue(graphs_isomorphic(parse_smiles('C1CCOC1'), parse_smiles('O1CCCC1')))
        self.assertNotEqual(scaffold_key(parse_smiles('C1CCOC1')), scaffold_key(parse_smiles('C1CCCC1')))


class TestFingerprint(unittest.TestCase):
    '''Testes do fingerprint circular'''

    def test_deterministic(self):
        '''Mesma molécula, mesmos bits'''
        a = morgan_fingerprint(parse_smiles('c1ccccc1O'))
        b = morgan_fingerprint(parse_smiles('c1ccccc1O'))
        self.assertEqual(a, b)
        self.assertEqual(a.width, 2048)
        self.assertGreater(a.popcount, 0)

    def test_invalid_width(self):
        '''Largura que não é potência de 2 é rejeitada'''
        with self.assertRaises(InvalidFingerprintWidth):
            morgan_fingerprint(parse_smiles('CC'), width=1000)

    def test_radius_zero_subset(self):
        '''Bits de raio 0 estão contidos nos de raio 2'''
        g = parse_smiles('CC(=O)Nc1ccccc1')
        r0 = set(morgan_fingerprint(g, radius=0).on_bits())
        r2 = set(morgan_fingerprint(g, radius=2).on_bits())
        self.assertTrue(r0 <= r2)

    def test_popcount_bound(self):
        '''No máximo um bit por átomo em cada camada: popcount <= átomos x (raio + 1)'''
        for smiles in ['C', 'CCO', 'c1ccccc1O', 'CC(=O)Nc1ccccc1', 'C1CCC2CCCCC2C1', 'O=C(O)CCCCCCCCN']:
            g = parse_smiles(smiles)
            for radius in range(4):
                with self.subTest(smiles=smiles, radius=radius):
                    fp = morgan_fingerprint(g, radius=radius, width=4096)
                    self.assertLessEqual(fp.popcount, g.n_atoms * (radius + 1))

    def test_tanimoto(self):
        '''Similaridade 1 consigo mesmo, menor com outra molécula'''
        a = morgan_fingerprint(parse_smiles('c1ccccc1CCN'))
        b = morgan_fingerprint(parse_smiles('C1CCCC1'))
        self.assertEqual(a.tanimoto(a), 1.0)
        self.assertLess(a.tanimoto(b), 1.0)


if __name__ == '__main__':
    unittest.main()

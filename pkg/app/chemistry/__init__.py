'''
Química: grafo molecular, scaffolds, fingerprints e SELFIES
'''

from app.chemistry.fingerprint import Fingerprint, morgan_fingerprint
from app.chemistry.molgraph import Atom, Bond, BondOrder, MolGraph, parse_smiles, parse_smiles_with_trace
from app.chemistry.scaffold import canonical_key, murcko_scaffold, scaffold_key, smiles_scaffold_key
from app.chemistry.selfies import SelfiesString, corpus_to_selfies, decode_selfies, encode_selfies, kekulize

__all__ = [
    'Atom',
    'Bond',
    'BondOrder',
    'Fingerprint',
    'MolGraph',
    'SelfiesString',
    'canonical_key',
    'corpus_to_selfies',
    'decode_selfies',
    'encode_selfies',
    'kekulize',
    'morgan_fingerprint',
    'murcko_scaffold',
    'parse_smiles',
    'parse_smiles_with_trace',
    'scaffold_key',
    'smiles_scaffold_key',
]

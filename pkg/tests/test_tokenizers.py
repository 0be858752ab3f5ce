import tempfile
import unittest
from collections import Counter
from pathlib import Path

import numpy as np

from app.errors import EmptyCorpus, TokenizationGap, VocabularyError
from app.tokenizers.bpe import BpeMerges, bpe_encode, bpe_segment, bpe_train
from app.tokenizers.encoding import Tokenizer, collate, encode_for_model
from app.tokenizers.regex_tokenizer import build_regex_vocab, regex_tokenize, regex_tokenize_spans
from app.tokenizers.vocab import BOS_ID, EOS_ID, MASK_ID, PAD_ID, UNK_ID, Vocab
from tests.helpers import fixture_corpus


def brute_force_merges(corpus, n_merges):
    '''Recontagem completa de pares a cada passo'''
    words = [list(line) for line in corpus]
    merges = []
    for _ in range(n_merges):
        counts = Counter()
        for symbols in words:
            counts.update(zip(symbols, symbols[1:]))
        best = min(counts.items(), key=lambda item: (-item[1], item[0]))[0]
        merges.append(best)
        merged_words = []
        for symbols in words:
            out, i = [], 0
            while i < len(symbols):
                if i + 1 < len(symbols) and (symbols[i], symbols[i + 1]) == best:
                    out.append(symbols[i] + symbols[i + 1])
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            merged_words.append(out)
        words = merged_words
    return merges


class TestRegexTokenizer(unittest.TestCase):
    '''Testes do tokenizador regex'''

    def test_lossless(self):
        '''A concatenação dos tokens reconstrói a string'''
        for smiles in fixture_corpus():
            self.assertEqual(''.join(regex_tokenize(smiles)), smiles)

    def test_atomic_tokens(self):
        '''Átomos entre colchetes e halogênios de duas letras são tokens únicos'''
        self.assertEqual(regex_tokenize('C[NH3+]ClBr'), ['C', '[NH3+]', 'Cl', 'Br'])
        self.assertEqual(regex_tokenize('CC(=O)O'), ['C', 'C', '(', '=', 'O', ')', 'O'])
        self.assertEqual(regex_tokenize('C%12CC%12'), ['C', '%12', 'C', 'C', '%12'])

    def test_spans_tile_input(self):
        '''Spans contíguos cobrindo a entrada'''
        spans = regex_tokenize_spans('c1ccccc1Cl')
        self.assertEqual(spans[0][1], 0)
        self.assertEqual(spans[-1][2], len('c1ccccc1Cl'))
        for (_, _, end), (_, start, _) in zip(spans, spans[1:]):
            self.assertEqual(end, start)

    def test_gap(self):
        '''Caractere não reconhecido gera TokenizationGap com posição'''
        with self.assertRaises(TokenizationGap) as ctx:
            regex_tokenize('CCX')
        self.assertEqual(ctx.exception.position, 2)

    def test_fuzz_lossless_or_gap(self):
        '''Strings aleatórias: sem perdas ou TokenizationGap'''
        alphabet = list('CNOSclnos()[]=#+-123%@/\\X')
        rng = np.random.default_rng(3)
        for _ in range(3000):
            text = ''.join(rng.choice(alphabet, size=rng.integers(1, 20)))
            try:
                self.assertEqual(''.join(regex_tokenize(text)), text)
            except TokenizationGap:
                pass

    def test_regex_vocab_frequency_order(self):
        '''Tokens mais frequentes recebem os menores ids após os especiais'''
        vocab = build_regex_vocab(['CCO', 'CC', 'O'])
        self.assertEqual(vocab.id_of('C'), 5)
        self.assertEqual(vocab.id_of('O'), 6)


class TestVocab(unittest.TestCase):
    '''Testes do vocabulário'''

    def test_special_ids(self):
        '''Ids fixos dos tokens especiais'''
        vocab = Vocab.from_tokens(['C'])
        self.assertEqual([vocab.id_of(t) for t in ('<pad>', '<unk>', '<s>', '</s>', '<mask>')],
                         [PAD_ID, UNK_ID, BOS_ID, EOS_ID, MASK_ID])
        self.assertEqual(vocab.id_of('Xx'), UNK_ID)

    def test_rejects_bad_ids(self):
        '''Ids não contíguos são rejeitados'''
        with self.assertRaises(VocabularyError):
            Vocab({'<pad>': 0, '<unk>': 1, '<s>': 2, '</s>': 3, '<mask>': 4, 'C': 7})


class TestBpe(unittest.TestCase):
    '''Testes do BPE'''

    def setUp(self):
        self.corpus = list(fixture_corpus())

    def test_empty_corpus(self):
        '''Corpus vazio gera EmptyCorpus'''
        with self.assertRaises(EmptyCorpus):
            bpe_train(['', '  '], 50)

    def test_target_too_small(self):
        '''Alvo que não excede alfabeto + especiais é rejeitado'''
        with self.assertRaises(VocabularyError):
            bpe_train(['CCO'], 7)

    def test_deterministic(self):
        '''Treinos repetidos geram as mesmas merges'''
        runs = [bpe_train(self.corpus, 60)[1].pairs for _ in range(3)]
        self.assertEqual(runs[0], runs[1])
        self.assertEqual(runs[1], runs[2])

    def test_first_merges_match_bruteforce(self):
        '''As 5 primeiras merges coincidem com a recontagem completa'''
        _, merges = bpe_train(self.corpus, 60)
        expected = brute_force_merges(sorted(set(self.corpus)), 5)
        self.assertEqual(list(merges.pairs[:5]), expected)

    def test_tie_break_lexicographic(self):
        '''Empate de frequência resolvido pelo par lexicograficamente menor'''
        _, merges = bpe_train(['ab', 'cd'], 5 + 4 + 1)
        self.assertEqual(merges[0], ('a', 'b'))

    def test_encode_lossless_and_unknown(self):
        '''Peças concatenadas reconstroem o texto; caracteres novos viram <unk>'''
        vocab, merges = bpe_train(self.corpus, 60)
        for smiles in self.corpus[:20]:
            self.assertEqual(''.join(bpe_segment(smiles, merges)), smiles)
        self.assertIn('<unk>', bpe_encode('CC[Na]', vocab, merges))

    def test_lowest_rank_first(self):
        '''A merge de menor posto é aplicada primeiro'''
        merges = BpeMerges((('b', 'c'), ('a', 'b')))
        self.assertEqual(bpe_segment('abc', merges), ['a', 'bc'])

    def test_more_merges_never_add_tokens(self):
        '''Acrescentar merges ao final nunca aumenta o número de peças'''
        _, merges = bpe_train(self.corpus, 80)
        samples = self.corpus[:30] + ['CC(=O)Oc1ccccc1C(=O)O', 'N#CCCl']
        for smiles in samples:
            counts = [len(bpe_segment(smiles, BpeMerges(merges.pairs[:k]))) for k in range(len(merges) + 1)]
            with self.subTest(smiles=smiles):
                self.assertEqual(counts[0], len(smiles))
                self.assertTrue(all(b <= a for a, b in zip(counts, counts[1:])))

    def test_encode_decode_encode_stable(self):
        '''encode(decode(encode(s))) == encode(s)'''
        tokenizer = Tokenizer.train('bpe', self.corpus, 60)
        for smiles in self.corpus[:40]:
            first = tokenizer.encode(smiles, 128)
            again = tokenizer.encode(tokenizer.decode(first.ids), 128)
            np.testing.assert_array_equal(again.ids, first.ids)
            np.testing.assert_array_equal(again.attention_mask, first.attention_mask)


class TestEncoding(unittest.TestCase):
    '''Testes de codificação para o modelo'''

    def setUp(self):
        self.vocab = Vocab.from_tokens(['C', 'O', 'N'])

    def test_bos_eos_padding(self):
        '''<s> corpo </s> seguido de <pad>'''
        seq = encode_for_model(['C', 'O'], self.vocab, 6)
        self.assertEqual(seq.ids.tolist(), [BOS_ID, 5, 6, EOS_ID, PAD_ID, PAD_ID])
        self.assertEqual(seq.attention_mask.tolist(), [1, 1, 1, 1, 0, 0])
        self.assertFalse(seq.overflow)

    def test_truncation_keeps_eos(self):
        '''Na truncagem o </s> fica na última posição'''
        seq = encode_for_model(['C'] * 10, self.vocab, 5)
        self.assertEqual(seq.ids.tolist(), [BOS_ID, 5, 5, 5, EOS_ID])
        self.assertTrue(seq.overflow)

    def test_collate_trims(self):
        '''Lote cortado no maior comprimento real'''
        a = encode_for_model(['C'], self.vocab, 10)
        b = encode_for_model(['C', 'O', 'N'], self.vocab, 10)
        ids, mask = collate([a, b])
        self.assertEqual(ids.shape, (2, 5))
        self.assertEqual(mask.sum(axis=1).tolist(), [3, 5])


class TestTokenizerBundle(unittest.TestCase):
    '''Testes do pacote tokenizador (JSON)'''

    def test_json_bit_exact(self):
        '''Serializar, ler e serializar de novo gera o mesmo texto'''
        tokenizer = Tokenizer.train('bpe', list(fixture_corpus()), 50)
        text = tokenizer.to_json()
        self.assertEqual(Tokenizer.from_json(text).to_json(), text)

    def test_save_load(self):
        '''Arquivo salvo é relido com o mesmo vocabulário e merges'''
        tokenizer = Tokenizer.train('regex', list(fixture_corpus()), 100)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'tok.json'
            tokenizer.save(path)
            loaded = Tokenizer.load(path)
        self.assertEqual(loaded.kind, 'regex')
        self.assertEqual(loaded.vocab, tokenizer.vocab)

    def test_decode_roundtrip(self):
        '''decode(encode(s)) == s quando todos os tokens são conhecidos'''
        tokenizer = Tokenizer.train('regex', list(fixture_corpus()), 100)
        seq = tokenizer.encode('c1ccccc1CCN', 32)
        self.assertEqual(tokenizer.decode(seq.ids), 'c1ccccc1CCN')

    def test_bad_special_tokens(self):
        '''Tokens especiais divergentes são rejeitados'''
        doc = Tokenizer.train('regex', ['CCO'], 20).to_dict()
        doc['special_tokens']['pad'] = '[PAD]'
        with self.assertRaises(VocabularyError):
            Tokenizer.from_dict(doc)


if __name__ == '__main__':
    unittest.main()

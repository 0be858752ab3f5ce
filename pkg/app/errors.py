'''
app/errors.py

Hierarquia de erros tipados da plataforma.
Toda falha de pipeline deriva de PlatformError; a CLI converte
essas exceções em código de saída 1.
'''


class PlatformError(Exception):
    '''Erro base da plataforma'''


class ConfigurationError(PlatformError, ValueError):
    '''Configuração inválida (perfil, arquivo JSON ou chave desconhecida)'''


# ============================================================================
# SMILES / GRAFO MOLECULAR
# ============================================================================

class SmilesParseError(PlatformError, ValueError):
    '''Falha ao interpretar uma string SMILES'''

    def __init__(self, message, smiles=None, position=None):
        self.smiles = smiles
        self.position = position
        if position is not None:
            message = f'{message} (posição {position})'
        super().__init__(message)


class EmptySmiles(SmilesParseError):
    pass


class UnmatchedRingBond(SmilesParseError):
    pass


class UnbalancedBranch(SmilesParseError):
    pass


class UnknownSymbol(SmilesParseError):
    pass


class UnclosedBracket(SmilesParseError):
    pass


class DisconnectedStructure(SmilesParseError):
    '''SMILES com componentes separados por "." (não suportado)'''


class InvalidFingerprintWidth(PlatformError, ValueError):
    pass


# ============================================================================
# TOKENIZAÇÃO
# ============================================================================

class TokenizationGap(PlatformError, ValueError):
    '''Caractere que nenhuma alternativa da regex consegue consumir'''

    def __init__(self, text, position):
        self.text = text
        self.position = position
        char = text[position] if 0 <= position < len(text) else ''
        super().__init__(f'Caractere não tokenizável {char!r} na posição {position}')


class EmptyCorpus(PlatformError, ValueError):
    pass


class VocabularyError(PlatformError, ValueError):
    pass


# ============================================================================
# SELFIES
# ============================================================================

class SelfiesError(PlatformError, ValueError):
    pass


class UnknownToken(SelfiesError):
    pass


class UnsupportedFeature(SelfiesError):
    pass


class KekulizationFailed(UnsupportedFeature):
    pass


# ============================================================================
# DADOS
# ============================================================================

class DataPipeError(PlatformError):
    pass


class CorpusIOError(DataPipeError, OSError):
    pass


class SizeExceedsCorpus(DataPipeError, ValueError):
    pass


class InvalidSubsetSizes(DataPipeError, ValueError):
    pass


class EmptyDataset(DataPipeError, ValueError):
    pass


class TaskFormatError(DataPipeError, ValueError):
    pass


# ============================================================================
# MODELO
# ============================================================================

class ModelError(PlatformError, ValueError):
    pass


class InvalidModelConfig(ModelError):
    pass


class ShapeMismatch(ModelError):
    pass


class NonFiniteValue(ModelError):
    def __init__(self, name):
        self.name = name
        super().__init__(f'Valor não finito em {name!r}')


class AllPositionsIgnored(ModelError):
    pass


class CheckpointError(PlatformError, ValueError):
    pass


class CorruptCheckpoint(CheckpointError):
    pass


class ConfigMismatch(CheckpointError):
    pass


# ============================================================================
# TREINO / MÉTRICAS / ARTEFATOS
# ============================================================================

class TrainingError(PlatformError, ValueError):
    pass


class EmptySplit(TrainingError):
    pass


class MetricError(PlatformError, ValueError):
    pass


class DegenerateLabels(MetricError):
    pass


class NoPositives(MetricError):
    pass


class ManifestError(PlatformError, ValueError):
    pass

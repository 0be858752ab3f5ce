'''
Formato de checkpoint

Layout do arquivo:
    b"MOLCKPT\\x00"                  8 bytes de assinatura
    uint64 little-endian             comprimento do cabeçalho JSON
    cabeçalho JSON UTF-8             {"format_version": 1, "config": {...}, "step": n,
                                      "tensors": [{"name", "dtype", "shape", "offset", "nbytes"}],
                                      "optimizer": {"step": t} | null,
                                      "tokenizer": {...} | null, "metadata": {...}}
    payload                          tensores little-endian, offsets relativos ao início do payload

Momentos do Adam são gravados como tensores "optimizer.m.<nome>" e "optimizer.v.<nome>".
'''

import json
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app.errors import CheckpointError, ConfigMismatch, CorruptCheckpoint, PlatformError
from app.tokenizers.encoding import Tokenizer
from app.transformer.model_config import ModelConfig
from app.transformer.optimizer import AdamState
from app.utils.artifacts import atomic_write_bytes

MAGIC = b'MOLCKPT\x00'
FORMAT_VERSION = 1
_LENGTH = struct.Struct('<Q')
_DTYPES = ('<f4', '<f8')


@dataclass
class Checkpoint:
    config: ModelConfig
    params: dict
    step: int = 0
    optimizer: Optional[AdamState] = None
    tokenizer: Optional[Tokenizer] = None
    metadata: dict = field(default_factory=dict)


def _tensor_entries(checkpoint):
    entries = [(name, checkpoint.params[name]) for name in checkpoint.config.parameter_shapes()]
    if checkpoint.optimizer is not None and checkpoint.optimizer.m:
        for name in checkpoint.config.parameter_shapes():
            entries.append((f'optimizer.m.{name}', checkpoint.optimizer.m[name]))
            entries.append((f'optimizer.v.{name}', checkpoint.optimizer.v[name]))
    return entries


def checkpoint_bytes(checkpoint):
    '''Serializar checkpoint em bytes'''
    tensors = []
    payload = bytearray()
    for name, value in _tensor_entries(checkpoint):
        array = np.ascontiguousarray(value)
        little = array.astype(array.dtype.newbyteorder('<'), copy=False)
        raw = little.tobytes()
        tensors.append({
            'name': name,
            'dtype': little.dtype.str,
            'shape': list(array.shape),
            'offset': len(payload),
            'nbytes': len(raw),
        })
        payload.extend(raw)

    header = {
        'format_version': FORMAT_VERSION,
        'config': checkpoint.config.to_dict(),
        'step': int(checkpoint.step),
        'tensors': tensors,
        'optimizer': None if checkpoint.optimizer is None else {'step': int(checkpoint.optimizer.step)},
        'tokenizer': None if checkpoint.tokenizer is None else checkpoint.tokenizer.to_dict(),
        'metadata': checkpoint.metadata,
    }
    header_bytes = json.dumps(header, ensure_ascii=False, separators=(',', ':')).encode('utf-8')
    return MAGIC + _LENGTH.pack(len(header_bytes)) + header_bytes + bytes(payload)


def save_checkpoint(checkpoint, path):
    atomic_write_bytes(path, checkpoint_bytes(checkpoint))


def _read_header(data):
    if len(data) < len(MAGIC) + _LENGTH.size:
        raise CorruptCheckpoint('Arquivo truncado antes do cabeçalho')
    if data[:len(MAGIC)] != MAGIC:
        raise CorruptCheckpoint('Assinatura de checkpoint inválida')
    (header_len,) = _LENGTH.unpack_from(data, len(MAGIC))
    start = len(MAGIC) + _LENGTH.size
    if start + header_len > len(data):
        raise CorruptCheckpoint('Cabeçalho truncado')
    try:
        header = json.loads(data[start:start + header_len].decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CorruptCheckpoint(f'Cabeçalho JSON ilegível: {e}') from e
    if not isinstance(header, dict):
        raise CorruptCheckpoint('Cabeçalho não é um objeto JSON')
    if header.get('format_version') != FORMAT_VERSION:
        raise CorruptCheckpoint(f'Versão de formato ausente ou não suportada: {header.get("format_version")!r}')
    return header, memoryview(data)[start + header_len:]


def _read_tensors(header, payload):
    tensors = {}
    try:
        entries = header['tensors']
        for entry in entries:
            dtype = entry['dtype']
            if dtype not in _DTYPES:
                raise CorruptCheckpoint(f'dtype {dtype!r} não suportado em {entry["name"]!r}')
            shape = tuple(int(s) for s in entry['shape'])
            offset, nbytes = int(entry['offset']), int(entry['nbytes'])
            expected = int(np.prod(shape, dtype=np.int64)) * np.dtype(dtype).itemsize
            if nbytes != expected or offset < 0 or offset + nbytes > len(payload):
                raise CorruptCheckpoint(f'Tensor {entry["name"]!r} truncado ou inconsistente')
            array = np.frombuffer(payload[offset:offset + nbytes], dtype=dtype).reshape(shape)
            tensors[entry['name']] = array.astype(np.dtype(dtype).newbyteorder('='), copy=True)
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptCheckpoint(f'Entrada de tensor malformada: {e}') from e
    return tensors


def checkpoint_from_bytes(data, expected_config=None):
    '''
    Desserializar checkpoint

    Args:
        data: bytes do arquivo
        expected_config: ModelConfig que o checkpoint deve satisfazer

    Raises:
        CorruptCheckpoint: arquivo truncado, cabeçalho ilegível ou tensores faltando
        ConfigMismatch: configuração estrutural diferente da esperada
    '''
    header, payload = _read_header(bytes(data))
    try:
        config = ModelConfig.from_dict(header['config'])
    except (KeyError, TypeError) as e:
        raise CorruptCheckpoint(f'Configuração ausente ou malformada: {e}') from e
    except PlatformError as e:
        raise CorruptCheckpoint(f'Configuração inválida no checkpoint: {e}') from e

    if expected_config is not None:
        differences = expected_config.structural_differences(config)
        if differences:
            detail = ', '.join(f'{k}: esperado {a}, encontrado {b}' for k, (a, b) in differences.items())
            raise ConfigMismatch(f'Checkpoint incompatível ({detail})')

    tensors = _read_tensors(header, payload)
    params = {}
    for name, shape in config.parameter_shapes().items():
        if name not in tensors:
            raise CorruptCheckpoint(f'Tensor {name!r} ausente')
        if tensors[name].shape != tuple(shape):
            raise CorruptCheckpoint(f'Tensor {name!r} com forma {tensors[name].shape}, esperada {shape}')
        params[name] = tensors[name]

    optimizer = None
    if header.get('optimizer') is not None:
        try:
            optimizer = AdamState(
                step=int(header['optimizer']['step']),
                m={name: tensors[f'optimizer.m.{name}'] for name in params},
                v={name: tensors[f'optimizer.v.{name}'] for name in params},
            )
        except (KeyError, TypeError) as e:
            raise CorruptCheckpoint(f'Estado do otimizador incompleto: {e}') from e

    tokenizer = None
    if header.get('tokenizer') is not None:
        try:
            tokenizer = Tokenizer.from_dict(header['tokenizer'])
        except PlatformError as e:
            raise CorruptCheckpoint(f'Tokenizador embutido inválido: {e}') from e

    return Checkpoint(
        config=config,
        params=params,
        step=int(header.get('step', 0)),
        optimizer=optimizer,
        tokenizer=tokenizer,
        metadata=dict(header.get('metadata') or {}),
    )


def load_checkpoint(path, expected_config=None):
    try:
        with open(path, 'rb') as f:
            data = f.read()
    except OSError as e:
        raise CheckpointError(f'Falha ao ler checkpoint {path}: {e}') from e
    return checkpoint_from_bytes(data, expected_config)

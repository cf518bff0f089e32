from typing import Dict, Iterable, List, Optional, Sequence

from navgen.errors import DataError
from navgen.utils import content_hash
from navgen.world.generator import LANDMARKS, ROOM_LABELS


PAD, BOS, EOS, UNK = 0, 1, 2, 3
RESERVED = ("<pad>", "<bos>", "<eos>", "<unk>")
MAX_VOCAB = 512

GRAMMAR_VERSION = "navgen-instr/2"

FUNCTION_WORDS = (
    ",",
    ".",
    "and",
    "finally",
    "first",
    "for",
    "forward",
    "go",
    "head",
    "in",
    "into",
    "left",
    "move",
    "next",
    "past",
    "right",
    "step",
    "steps",
    "stop",
    "straight",
    "then",
    "the",
    "to",
    "turn",
    "walk",
)

COUNT_WORDS = ("one", "two", "three", "four", "five", "six", "seven", "eight", "nine")


class Vocab:
    """Bijective token <-> id table with fixed reserved ids."""

    def __init__(self, tokens: Sequence[str]):
        if tuple(tokens[: len(RESERVED)]) != RESERVED:
            raise DataError(f"vocab must start with the reserved tokens {RESERVED}")
        if len(set(tokens)) != len(tokens):
            raise DataError("vocab tokens must be unique")
        if len(tokens) > MAX_VOCAB:
            raise DataError(f"vocab has {len(tokens)} tokens, limit is {MAX_VOCAB}")
        self.tokens: List[str] = list(tokens)
        self.index: Dict[str, int] = {tok: i for i, tok in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def __eq__(self, other):
        return isinstance(other, Vocab) and self.tokens == other.tokens

    def __contains__(self, token: str) -> bool:
        return token in self.index

    @property
    def content_words(self) -> List[str]:
        return [tok for tok in self.tokens[len(RESERVED) :] if tok.isalpha()]

    def encode(self, text: str) -> List[int]:
        return [BOS] + [self.index.get(tok, UNK) for tok in text.split()] + [EOS]

    def decode(self, ids: Iterable[int]) -> str:
        words = []
        for i in ids:
            if i in (PAD, BOS, EOS):
                continue
            if not 0 <= i < len(self.tokens):
                raise DataError(f"token id {i} outside vocab of size {len(self.tokens)}")
            words.append(self.tokens[i])
        return " ".join(words)

    def to_dict(self) -> dict:
        return {"grammar": GRAMMAR_VERSION, "tokens": self.tokens, "hash": self.hash}

    @classmethod
    def from_dict(cls, data: dict) -> "Vocab":
        if data.get("grammar") != GRAMMAR_VERSION:
            raise DataError(f"unsupported grammar {data.get('grammar')!r}, expected {GRAMMAR_VERSION!r}")
        return cls(data["tokens"])

    @property
    def hash(self) -> str:
        return content_hash(self.tokens)


def build_vocab() -> Vocab:
    words = sorted(set(FUNCTION_WORDS) | set(COUNT_WORDS) | set(ROOM_LABELS) | set(LANDMARKS))
    return Vocab(list(RESERVED) + words)


DEFAULT_VOCAB = build_vocab()


def tokenize(text: str, vocab: Optional[Vocab] = None) -> List[int]:
    return (vocab or DEFAULT_VOCAB).encode(text)


def detokenize(ids: Iterable[int], vocab: Optional[Vocab] = None) -> str:
    return (vocab or DEFAULT_VOCAB).decode(ids)

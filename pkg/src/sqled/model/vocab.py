"""Word-level vocabularies with a reserved UNK row 0."""

from __future__ import annotations

from collections import Counter
from typing import Iterable

UNK = "<unk>"


def norm_token(text: str) -> str:
    return text.lower()


class Vocab:
    def __init__(self, items: Iterable[str] = ()):
        self.itos: list[str] = [UNK]
        self.stoi: dict[str, int] = {UNK: 0}
        for s in items:
            if s not in self.stoi:
                self.stoi[s] = len(self.itos)
                self.itos.append(s)

    @classmethod
    def build(cls, words: Iterable[str], min_count: int = 1) -> "Vocab":
        counts = Counter(words)
        return cls(sorted(w for w, c in counts.items() if c >= min_count and w != UNK))

    def __len__(self) -> int:
        return len(self.itos)

    def __getitem__(self, s: str) -> int:
        return self.stoi.get(s, 0)

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocab) and self.itos == other.itos

    def to_list(self) -> list[str]:
        return list(self.itos[1:])

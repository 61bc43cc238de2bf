"""Classic Porter (1980) suffix-stripping stemmer.

Implemented in-repo so the analyzer contract is pinned to the original
algorithm definition rather than to a third-party library revision.
Input is expected to be a lowercase token; digits are treated as
consonants, which leaves purely numeric tokens untouched.
"""

from __future__ import annotations

from functools import lru_cache

_STEP2 = (
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
)

_STEP3 = (
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
)

_STEP4 = (
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement",
    "ment", "ent", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
)


class _Buffer:
    """Working state for a single stem: the word and the suffix cursor ``j``."""

    __slots__ = ("b", "j")

    def __init__(self, word: str) -> None:
        self.b = word
        self.j = 0

    def _cons(self, i: int) -> bool:
        ch = self.b[i]
        if ch in "aeiou":
            return False
        if ch == "y":
            return True if i == 0 else not self._cons(i - 1)
        return True

    def _measure(self, end: int) -> int:
        """Count VC sequences in b[0:end] (the m of the algorithm)."""
        n = 0
        i = 0
        while True:
            if i >= end:
                return n
            if not self._cons(i):
                break
            i += 1
        i += 1
        while True:
            while True:
                if i >= end:
                    return n
                if self._cons(i):
                    break
                i += 1
            i += 1
            n += 1
            while True:
                if i >= end:
                    return n
                if not self._cons(i):
                    break
                i += 1
            i += 1

    def _vowel_in_stem(self) -> bool:
        return any(not self._cons(i) for i in range(self.j))

    def _double_cons(self) -> bool:
        k = len(self.b) - 1
        if k < 1 or self.b[k] != self.b[k - 1]:
            return False
        return self._cons(k)

    def _cvc(self, i: int) -> bool:
        if i < 2 or not self._cons(i) or self._cons(i - 1) or not self._cons(i - 2):
            return False
        return self.b[i] not in "wxy"

    def ends(self, suffix: str) -> bool:
        if len(suffix) > len(self.b):
            return False
        if not self.b.endswith(suffix):
            return False
        self.j = len(self.b) - len(suffix)
        return True

    def set_to(self, s: str) -> None:
        self.b = self.b[: self.j] + s

    def replace_if_m(self, s: str) -> None:
        if self._measure(self.j) > 0:
            self.set_to(s)

    def chop(self, n: int = 1) -> None:
        self.b = self.b[:-n]

    # -- algorithm steps ------------------------------------------------

    def step1ab(self) -> None:
        if self.b.endswith("s"):
            if self.ends("sses"):
                self.chop(2)
            elif self.ends("ies"):
                self.set_to("i")
            elif len(self.b) >= 2 and self.b[-2] != "s":
                self.chop()
        if self.ends("eed"):
            if self._measure(self.j) > 0:
                self.chop()
        elif (self.ends("ed") or self.ends("ing")) and self._vowel_in_stem():
            self.b = self.b[: self.j]
            if self.ends("at"):
                self.set_to("ate")
            elif self.ends("bl"):
                self.set_to("ble")
            elif self.ends("iz"):
                self.set_to("ize")
            elif self._double_cons():
                if self.b[-1] not in "lsz":
                    self.chop()
            elif self._measure(len(self.b)) == 1 and self._cvc(len(self.b) - 1):
                self.b += "e"

    def step1c(self) -> None:
        if self.ends("y") and self._vowel_in_stem():
            self.b = self.b[:-1] + "i"

    def step2(self) -> None:
        for suffix, repl in _STEP2:
            if self.ends(suffix):
                self.replace_if_m(repl)
                return

    def step3(self) -> None:
        for suffix, repl in _STEP3:
            if self.ends(suffix):
                self.replace_if_m(repl)
                return

    def step4(self) -> None:
        if self.ends("ion"):
            if self.j >= 1 and self.b[self.j - 1] in "st" and self._measure(self.j) > 1:
                self.b = self.b[: self.j]
            return
        for suffix in _STEP4:
            if self.ends(suffix):
                if self._measure(self.j) > 1:
                    self.b = self.b[: self.j]
                return

    def step5(self) -> None:
        if self.b.endswith("e"):
            m = self._measure(len(self.b))
            if m > 1 or (m == 1 and not self._cvc(len(self.b) - 2)):
                self.chop()
        if self.b.endswith("l") and self._double_cons() and self._measure(len(self.b)) > 1:
            self.chop()


@lru_cache(maxsize=65536)
def stem(word: str) -> str:
    """Stem one lowercase token; tokens of length <= 2 pass through."""
    if len(word) <= 2:
        return word
    buf = _Buffer(word)
    buf.step1ab()
    buf.step1c()
    buf.step2()
    buf.step3()
    buf.step4()
    buf.step5()
    return buf.b

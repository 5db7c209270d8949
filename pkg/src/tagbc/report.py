"""Plain-text verification reports with a stable layout."""

from __future__ import annotations

from dataclasses import dataclass, field

PASS, FAIL, SKIP = "pass", "fail", "skip"


@dataclass
class VerificationReport:
    suite: str
    cases: list[tuple[str, str, str]] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def add(self, case_id: str, ok: bool | None, detail: str = "") -> None:
        status = SKIP if ok is None else (PASS if ok else FAIL)
        self.cases.append((case_id, status, detail))

    def extend(self, other: VerificationReport, prefix: str = "") -> None:
        for cid, st, det in other.cases:
            self.cases.append((prefix + cid, st, det))

    def counts(self) -> dict[str, int]:
        out = {PASS: 0, FAIL: 0, SKIP: 0}
        for _, st, _ in self.cases:
            out[st] += 1
        return out

    @property
    def failures(self) -> list[tuple[str, str, str]]:
        return [c for c in self.cases if c[1] == FAIL]

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok

    def render(self) -> str:
        lines = [f"suite: {self.suite}"]
        for k in sorted(self.params):
            lines.append(f"param {k}: {self.params[k]}")
        for cid, st, det in self.cases:
            lines.append(f"case {cid}: {st}" + (f" | {det}" if det else ""))
        c = self.counts()
        lines.append(f"summary: {c[PASS]} pass, {c[FAIL]} fail, {c[SKIP]} skip")
        lines.append(f"verdict: {'pass' if self.ok else 'fail'}")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> VerificationReport:
        rep = cls("")
        for ln, line in enumerate(text.splitlines(), 1):
            if line.startswith("suite: "):
                rep.suite = line[7:]
            elif line.startswith("param "):
                k, _, v = line[6:].partition(": ")
                rep.params[k] = v
            elif line.startswith("case "):
                head, _, det = line[5:].partition(" | ")
                cid, _, st = head.rpartition(": ")
                if st not in (PASS, FAIL, SKIP):
                    raise ValueError(f"line {ln}: bad case status {st!r}")
                rep.cases.append((cid, st, det))
            elif line.startswith(("summary: ", "verdict: ")) or not line:
                continue
            else:
                raise ValueError(f"line {ln}: unrecognized report line")
        return rep

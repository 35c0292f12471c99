import pytest

from mdiqd.qcore import BellOutcome as B

# Worked example: shared key, both messages and the announced outcomes.
KEY = "10011101101001010010"
A = "10110100111010110011"
B_MSG = "01101000101001101011"
M = [B.PhiMinus, B.PsiPlus, B.PhiPlus, B.PsiMinus, B.PsiMinus, B.PhiMinus, B.PhiMinus,
     B.PhiPlus, B.PsiPlus, B.PsiMinus, B.PhiPlus, B.PhiPlus, B.PsiMinus, B.PhiMinus,
     B.PhiMinus, B.PhiMinus, B.PsiPlus, B.PhiMinus, B.PhiPlus, B.PhiMinus]
X = [1, 1, 0, 0, 0, 1, 1, 0, 1, 0, 0, 0, 0, 1, 1, 1, 1, 1, 0, 1]
Y = [0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0]
Z = [0, 0, 1, 0, 0, 0, 0, 1, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0, 1, 0]
X_XOR_Y = [1, 1, 0, 1, 1, 1, 1, 0, 1, 0, 0, 1, 0, 1, 1, 1, 1, 1, 0, 1]
X_XOR_Z = [1, 1, 1, 0, 0, 1, 1, 1, 1, 1, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1]
KEPT_XY = [1, 2, 4, 5, 6, 7, 9, 12, 14, 15, 16, 17, 18, 20]
A_PRIME = "10101010011001"
B_PRIME_P1 = "01010010110101"
B_PRIME_P2 = "01100010101101011"
# kets as printed: - 0 1 - + - 0 + - 1 - 0 1 + 1 - 0 0 - 1
QA_KETS = "-01-+-0+-1-01+1-00-1"
QB_KETS = "+11+-+0+-0-00-1+10-1"


_ACCEPTANCE = []


def record_acceptance(label, ok, detail=""):
    _ACCEPTANCE.append((label, ok, detail))


@pytest.fixture
def acceptance():
    return record_acceptance


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")

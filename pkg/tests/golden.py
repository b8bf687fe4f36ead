"""Hand-transcribed parity matrices of the (n, k, d) = (6, 2, 4) variant-A
code over GF(32) (x^5 + x^2 + 1) with lambda_i = theta^i.

Each matrix is 9 block rows by 9 columns; a token ``Li`` is the column
(1, lam_i, lam_i^2, lam_i^3), ``-Li`` its negation and ``0`` the zero
column.
"""

H = [
    # H_0
    """
    L0  -L1 -L2 0   0   0   0   0   0
    0   L1  0   0   0   0   0   0   0
    0   0   L2  0   0   0   0   0   0
    0   0   0   L0  -L1 -L2 0   0   0
    0   0   0   0   L1  0   0   0   0
    0   0   0   0   0   L2  0   0   0
    0   0   0   0   0   0   L0  -L1 -L2
    0   0   0   0   0   0   0   L1  0
    0   0   0   0   0   0   0   0   L2
    """,
    # H_1
    """
    L3  0   0   0   0   0   0   0   0
    -L3 L4  -L5 0   0   0   0   0   0
    0   0   L5  0   0   0   0   0   0
    0   0   0   L3  0   0   0   0   0
    0   0   0   -L3 L4  -L5 0   0   0
    0   0   0   0   0   L5  0   0   0
    0   0   0   0   0   0   L3  0   0
    0   0   0   0   0   0   -L3 L4  -L5
    0   0   0   0   0   0   0   0   L5
    """,
    # H_2
    """
    L6  0   0   0   0   0   0   0   0
    0   L7  0   0   0   0   0   0   0
    -L6 -L7 L8  0   0   0   0   0   0
    0   0   0   L6  0   0   0   0   0
    0   0   0   0   L7  0   0   0   0
    0   0   0   -L6 -L7 L8  0   0   0
    0   0   0   0   0   0   L6  0   0
    0   0   0   0   0   0   0   L7  0
    0   0   0   0   0   0   -L6 -L7 L8
    """,
    # H_3
    """
    L9  0   0   -L10 0    0    -L11 0    0
    0   L9  0   0    -L10 0    0    -L11 0
    0   0   L9  0    0    -L10 0    0    -L11
    0   0   0   L10  0    0    0    0    0
    0   0   0   0    L10  0    0    0    0
    0   0   0   0    0    L10  0    0    0
    0   0   0   0    0    0    L11  0    0
    0   0   0   0    0    0    0    L11  0
    0   0   0   0    0    0    0    0    L11
    """,
    # H_4
    """
    L12  0    0    0   0   0   0    0    0
    0    L12  0    0   0   0   0    0    0
    0    0    L12  0   0   0   0    0    0
    -L12 0    0    L13 0   0   -L14 0    0
    0    -L12 0    0   L13 0   0    -L14 0
    0    0    -L12 0   0   L13 0    0    -L14
    0    0    0    0   0   0   L14  0    0
    0    0    0    0   0   0   0    L14  0
    0    0    0    0   0   0   0    0    L14
    """,
    # H_5
    """
    L15  0    0    0    0    0    0   0   0
    0    L15  0    0    0    0    0   0   0
    0    0    L15  0    0    0    0   0   0
    0    0    0    L16  0    0    0   0   0
    0    0    0    0    L16  0    0   0   0
    0    0    0    0    0    L16  0   0   0
    -L15 0    0    -L16 0    0    L17 0   0
    0    -L15 0    0    -L16 0    0   L17 0
    0    0    -L15 0    0    -L16 0   0   L17
    """,
]


def parse(text: str) -> dict[tuple[int, int], tuple[int, int]]:
    """Nonzero entries as {(i, j): (sign, lambda index)}."""
    out = {}
    rows = [line.split() for line in text.strip().splitlines()]
    assert len(rows) == 9 and all(len(r) == 9 for r in rows)
    for i, row in enumerate(rows):
        for j, tok in enumerate(row):
            if tok == "0":
                continue
            sign = -1 if tok.startswith("-") else 1
            out[(i, j)] = (sign, int(tok.lstrip("-")[1:]))
    return out


ENTRIES = [parse(t) for t in H]

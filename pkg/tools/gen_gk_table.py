"""Regenerate the compiled-in 25-digit Gauss-Kronrod(7,15) fallback table.

Runs entirely on mpmath so the table's provenance is independent of the
gmpy2-based runtime derivation in quadprice.rules: a defect would have to
appear identically in two unrelated multiprecision stacks to slip through
the startup cross-validation.

Usage: python tools/gen_gk_table.py  (prints the table ready to paste)
"""

from mpmath import mp, mpf, cos, pi, matrix, lu_solve

mp.dps = 50


def legendre(n, x):
    """P_n(x) and P_n'(x) via the three-term recurrence."""
    p0, p1 = mpf(1), x
    if n == 0:
        return p0, mpf(0)
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    return p1, n * (x * p1 - p0) / (x * x - 1)


def gauss_nodes(n):
    nodes = []
    for i in range(n):
        x = mpf(cos(pi * (i + mpf(3) / 4) / (n + mpf(1) / 2)))
        for _ in range(100):
            p, dp = legendre(n, x)
            dx = p / dp
            x -= dx
            if abs(dx) < mpf(10) ** (-mp.dps + 5):
                break
        nodes.append(x)
    return sorted(nodes)


def stieltjes_nodes(n):
    # roots of E_{n+1}, orthogonal to degree <= n against the weight P_n
    gl = gauss_nodes(2 * n + 2)
    glw = [2 / ((1 - x * x) * legendre(2 * n + 2, x)[1] ** 2) for x in gl]
    pn = [legendre(n, x)[0] for x in gl]
    mom = [sum(w * p * x ** m for x, w, p in zip(gl, glw, pn))
           for m in range(2 * (n + 1) + 1)]
    A = matrix(n + 1, n + 1)
    rhs = matrix(n + 1, 1)
    for j in range(n + 1):
        for i in range(n + 1):
            A[j, i] = mom[i + j]
        rhs[j] = -mom[n + 1 + j]
    c = lu_solve(A, rhs)
    coeffs = [c[i] for i in range(n + 1)] + [mpf(1)]  # ascending

    def eval_e(x):
        acc, dacc = mpf(0), mpf(0)
        for cf in reversed(coeffs):
            dacc = dacc * x + acc
            acc = acc * x + cf
        return acc, dacc

    # bisection brackets: E_{n+1} roots interlace with P_n structure; scan a
    # fine grid for sign changes, then Newton-polish
    grid = [mpf(-1) + mpf(2) * i / 4096 for i in range(4097)]
    vals = [eval_e(x)[0] for x in grid]
    roots = []
    for i in range(4096):
        if vals[i] == 0:
            roots.append(grid[i])
        elif vals[i] * vals[i + 1] < 0:
            x = (grid[i] + grid[i + 1]) / 2
            for _ in range(100):
                v, dv = eval_e(x)
                dx = v / dv
                x -= dx
                if abs(dx) < mpf(10) ** (-mp.dps + 5):
                    break
            roots.append(x)
    assert len(roots) == n + 1, f"expected {n + 1} Stieltjes roots, found {len(roots)}"
    return sorted(roots)


def kronrod(n):
    gn = gauss_nodes(n)
    nodes = sorted(gn + stieltjes_nodes(n))
    m = 2 * n + 1
    A = matrix(m, m)
    rhs = matrix(m, 1)
    for j in range(m):
        for i, x in enumerate(nodes):
            A[j, i] = legendre(j, x)[0] if j > 0 else mpf(1)
        rhs[j] = mpf(2) if j == 0 else mpf(0)
    kw = lu_solve(A, rhs)
    gw = [2 / ((1 - x * x) * legendre(n, x)[1] ** 2) for x in gn]
    return nodes, [kw[i] for i in range(m)], gn, gw


def main():
    n = 7
    nodes, kw, gn, gw = kronrod(n)
    fmt = lambda v: mp.nstr(v, 25, strip_zeros=False)
    print('# positive-half Kronrod nodes and weights, 25 significant digits')
    print('GK715_TABLE = (')
    for i in range(n, 2 * n + 1):
        print(f'    ("{fmt(nodes[i])}", "{fmt(kw[i])}"),')
    print(')')
    # gauss nodes sorted ascending; positive half is indices (n-1)//2 .. n-1
    print('# embedded Gauss weights for the non-negative nodes, ascending')
    print('G7_WEIGHTS = (')
    for w in gw[(n - 1) // 2:]:
        print(f'    "{fmt(w)}",')
    print(')')
    # sanity: embedded gauss nodes sit at odd 0-based kronrod indices
    for i, g in enumerate(gn):
        assert abs(nodes[2 * i + 1] - g) < mpf(10) ** (-mp.dps + 8)
    assert abs(sum(kw) - 2) < mpf(10) ** (-mp.dps + 8)
    assert abs(sum(gw) - 2) < mpf(10) ** (-mp.dps + 8)


if __name__ == "__main__":
    main()

"""Independent high-precision values for the info-core examples.

Uses mpmath at 50 digits and direct double sums, sharing no code with the
package. Run: python tests/oracles/oracle_info_values.py
"""

import mpmath as mp

mp.mp.dps = 50


def hb(p):
    p = mp.mpf(p)
    return -(p * mp.log(p) + (1 - p) * mp.log(1 - p))


def mi(table):
    rows = [sum(r) for r in table]
    cols = [sum(c) for c in zip(*table)]
    total = mp.mpf(0)
    for i, r in enumerate(table):
        for j, p in enumerate(r):
            if p > 0:
                total += p * mp.log(p / (rows[i] * cols[j]))
    return total


if __name__ == "__main__":
    print("binary_entropy(0.25) =", mp.nstr(hb("0.25"), 17))
    probs = [mp.mpf("0.5"), mp.mpf("0.3"), mp.mpf("0.2")]
    print("entropy(0.5,0.3,0.2) =", mp.nstr(-sum(p * mp.log(p) for p in probs), 17))
    t = [[mp.mpf("0.4"), mp.mpf("0.1")], [mp.mpf("0.1"), mp.mpf("0.4")]]
    print("mi(0.4,0.1;0.1,0.4) =", mp.nstr(mi(t), 17))
    # 3x2 fixture (rows are y-parts): integers / 20
    fixture = [[3, 1], [2, 6], [5, 3]]
    t = [[mp.mpf(v) / 20 for v in r] for r in fixture]
    print("normalized_mi(3x2 fixture) =", mp.nstr(mi(t) / mp.log(2), 17))
    # 2x2 symmetric joint (q, 1/2-q; 1/2-q, q) with I = 0.5 bits = 0.5 ln 2 nats:
    # I = ln 2 - H_b(2q), so H_b(2q) = 0.5 ln 2; solve for 2q in (0, 1/2)
    r = mp.findroot(lambda s: hb(s) - mp.log(2) / 2, mp.mpf("0.1"))
    print("q for I_bits=0.5 =", mp.nstr(r / 2, 20))
    # three-column master (rows y, columns x): column masses (0.3,0),(0,0.3),(0.2,0.2)
    print("dp 3-col value =", mp.nstr(mp.log(2) - mp.mpf("0.7") * hb(mp.mpf(2) / 7), 17))

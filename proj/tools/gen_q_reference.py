#!/usr/bin/env python3
"""Regenerates tests/data/q_reference.csv with 50-digit mpmath arithmetic."""
import mpmath as mp

mp.mp.dps = 50


def q(x):
    return mp.erfc(mp.mpf(x) / mp.sqrt(2)) / 2


def q_inverse(eps):
    lo, hi = mp.mpf(-40), mp.mpf(40)
    for _ in range(300):
        mid = (lo + hi) / 2
        if q(mid) > eps:
            lo = mid
        else:
            hi = mid
    return lo


def main():
    xs = ["-8", "-6.5", "-5", "-3.3", "-2.5", "-1", "-0.3", "0", "0.3", "1", "1.5", "2", "2.5", "3.7",
          "4.2", "5", "5.998", "6", "6.75", "7.3", "8"]
    tail = ["10", "20", "30", "36.9", "37.5", "40", "50", "100", "1000", "10000"]
    eps = ["0.999999999999", "0.999", "0.75", "0.25", "1e-3", "1e-5", "1e-9", "1e-12", "1e-100", "1e-300"]
    print("kind,arg,value")
    for x in xs:
        print(f"q,{x},{mp.nstr(q(x), 25)}")
    for x in xs + tail:
        print(f"log10q,{x},{mp.nstr(mp.log10(q(x)), 25)}")
    for e in eps:
        print(f"qinv,{e},{mp.nstr(q_inverse(mp.mpf(e)), 25)}")


if __name__ == "__main__":
    main()

"""Exact rational integrals of the bistable cubic s(1-s)(s-a)."""

from fractions import Fraction as F


def antiderivative(a, s):
    # s(1-s)(s-a) = -s^3 + (1+a) s^2 - a s
    return -s**4 / 4 + (1 + a) * s**3 / 3 - a * s**2 / 2


def integral(a, t=F(0)):
    return antiderivative(a, F(1)) - antiderivative(a, t)


if __name__ == "__main__":
    for a in (F(1, 4), F(1, 2), F(3, 4)):
        print(f"a={a}: int_0^1 = {integral(a)}  (= (1-2a)/12: {(1 - 2 * a) / 12})")
    # for a = 1/4 the tail integral is smallest near t = 1 where it tends to 0 from above
    a = F(1, 4)
    ts = [F(k, 1000) for k in range(0, 1000)]
    vals = [integral(a, t) for t in ts]
    print("a=1/4: min over t in [0, 0.999] of int_t^1 =", min(vals), float(min(vals)))

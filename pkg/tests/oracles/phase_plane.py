"""Profile-variable oracle for the phase-plane orbit from (q, p) = (0, -eps).

With sigma = -p and s the reversed travelling coordinate, the orbit solves
q' = sigma, sigma' = c sigma - f(q). Fixed-step RK4 in s (ds = 1e-3) follows it
until q reaches 1 (report w(1) = sigma^2) or sigma vanishes (report q there).
A fixed step in q cannot be used: near the origin the orbit lives on the scale eps.
"""


def run(c, eps, f, ds=1e-3, s_max=1e3):
    q, sg = 0.0, eps

    def rhs(q, sg):
        return sg, c * sg - f(q)

    s = 0.0
    while s < s_max:
        k1 = rhs(q, sg)
        k2 = rhs(q + ds / 2 * k1[0], sg + ds / 2 * k1[1])
        k3 = rhs(q + ds / 2 * k2[0], sg + ds / 2 * k2[1])
        k4 = rhs(q + ds * k3[0], sg + ds * k3[1])
        qn = q + ds / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        sn = sg + ds / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if qn >= 1.0:
            w = (1.0 - q) / (qn - q)
            return "reached_one", ((1 - w) * sg + w * sn) ** 2
        if sn <= 0.0:
            w = sg / (sg - sn)
            return "vanished", (1 - w) * q + w * qn
        q, sg, s = qn, sn, s + ds
    return "undecided", q


def kpp(s):
    return s * (1.0 - s)


if __name__ == "__main__":
    print("KPP c=3 eps=1e-8:", run(3.0, 1e-8, kpp))
    print("KPP c=1 eps=1e-8:", run(1.0, 1e-8, kpp))
    print("KPP c=2.5 eps=0.5:", run(2.5, 0.5, kpp))

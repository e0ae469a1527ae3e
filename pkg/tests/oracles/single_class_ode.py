"""Single-class limit equation solved with mpmath's Taylor integrator.

For one class with weight 1 the aggregate is m(t) = alpha q(t) and

    dq/dt = (1 - q) exp(beta alpha q - gamma),  q(0) = 0.

With alpha = beta = 1, gamma = 0 separation of variables gives the
implicit relation  int_0^q e^{-u}/(1-u) du = t,  checked here by
adaptive quadrature on top of the Taylor solution.
"""

import mpmath as mp

mp.mp.dps = 30


def q_taylor(alpha, beta, gamma, t_end):
    f = lambda t, q: (1 - q) * mp.e**(beta * alpha * q - gamma)
    return mp.odefun(f, 0, 0)


def main():
    sol = q_taylor(1, 1, 0, 2)
    for t in ("0.5", "1", "2"):
        t = mp.mpf(t)
        q = sol(t)
        back = mp.quad(lambda u: mp.e**-u / (1 - u), [0, q])
        print("a=b=1 g=0  q(%s) = %s   quad-back t = %s"
              % (t, mp.nstr(q, 18), mp.nstr(back, 18)))

    sol2 = q_taylor(1, 2, 1, 2)
    print("a=1 b=2 g=1  q(2) =", mp.nstr(sol2(mp.mpf(2)), 18))


if __name__ == "__main__":
    main()

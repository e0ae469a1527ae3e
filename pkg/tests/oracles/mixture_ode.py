"""Two-class limit systems solved with scipy's DOP853 at tight tolerance.

The vector field is typed here from scratch:

    dq_k/dt = (1 - q_k) exp(beta_k m - gamma_k),  m = sum_k w_k alpha_k q_k

for the three two-class mixtures exercised throughout the tests. Prints
q_k, m and the unit-exposure mean loss at the probe times.
"""

import numpy as np
from scipy.integrate import solve_ivp

MIXTURES = {
    # name: (alpha, beta, gamma, weight)
    "takeoff_40": ([4.0, 0.1], [4.0, 0.1], [3.0, 3.0], [0.4, 0.6]),
    "takeoff_20": ([4.0, 0.1], [4.0, 0.1], [3.0, 3.0], [0.2, 0.8]),
    "even_mix": ([3.0, 0.1], [3.0, 0.1], [3.0, 1.0], [0.5, 0.5]),
    "ratio3_mix": ([2.0, 1.0], [6.0, 3.0], [4.0, 5.0], [0.4, 0.6]),
}


def rhs_factory(alpha, beta, gamma, weight):
    a, b, g, w = map(np.asarray, (alpha, beta, gamma, weight))

    def rhs(t, q):
        m = np.dot(w * a, q)
        return (1.0 - q) * np.exp(b * m - g)

    return rhs


def main():
    for name, (a, b, g, w) in MIXTURES.items():
        res = solve_ivp(
            rhs_factory(a, b, g, w), (0.0, 5.0), [0.0, 0.0],
            method="DOP853", rtol=1e-13, atol=1e-14,
            t_eval=[1.0, 2.5, 5.0],
        )
        w = np.asarray(w)
        for t, q in zip(res.t, res.y.T):
            m = float(np.dot(w * np.asarray(a), q))
            loss = float(np.dot(w, q))
            print("%-11s t=%.1f  q=(%.15f, %.15f)  m=%.15f  l=%.15f"
                  % (name, t, q[0], q[1], m, loss))


if __name__ == "__main__":
    main()

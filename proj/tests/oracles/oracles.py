"""Independent reference values for the C++ tests (numpy/scipy only).

Run: python3 tests/oracles/oracles.py
"""
import numpy as np
from scipy.integrate import solve_ivp

SQ2 = np.sqrt(2.0)
Q = 0.5 * np.array([[SQ2, 1.0], [1.0, SQ2]])
U_STAR = np.array([5.0, -5.0])
K = 0.75


def phi(u):
    d = np.asarray(u) - U_STAR
    return 0.5 * d @ Q @ d


def grad(u):
    return Q @ (np.asarray(u) - U_STAR)


def rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


print("rk4 decay one step h=0.1:", repr(rk4_step(lambda x: -x, 1.0, 0.1)))
print("exp(-0.1):", repr(np.exp(-0.1)))

print("phi(7,-5):", repr(phi([7, -5])), "phi(5,-3):", repr(phi([5, -3])))
print("grad(7,-5):", grad([7, -5]))
print("grad(0,0):", grad([0, 0]))

u = np.array([7.0, -5.0])
V = (1 - K) * phi(u) + 0.5 * K * np.sum(grad(u) ** 2)
print("V(7,-5,y=0):", repr(V))


def moments(v, n=20000):
    t = np.linspace(0, 1, n, endpoint=False)
    vs = np.array([v(s) for s in t])
    return np.abs(vs.mean(0)).max(), np.abs(vs.T @ vs / n - np.eye(2)).max()


print("moments reference:", moments(lambda s: SQ2 * np.array([np.sin(2 * np.pi * s), np.sin(4 * np.pi * s)])))
print("moments sin/cos:", moments(lambda s: SQ2 * np.array([np.sin(2 * np.pi * s), np.cos(2 * np.pi * s)])))
print("moments degenerate:", moments(lambda s: np.array([np.sin(2 * np.pi * s), np.sin(2 * np.pi * s)])))


# Target system from zero: zero-order-held (u_hat, y_hat) with resets when |e|^2 >= rho.
def target_from_zero(rho=1.0, t_end=50.0):
    t, held = 0.0, np.zeros(4)  # u_hat, y_hat
    x = np.zeros(4)
    jumps = 0

    def rhs(_, z):
        u, y = z[:2], z[2:]
        uh, yh = held[:2], held[2:]
        return np.concatenate([-K * yh, grad(uh) - y])

    def event(_, z):
        return np.sum((z - held) ** 2) - rho

    event.terminal = True
    event.direction = 1
    while t < t_end:
        sol = solve_ivp(rhs, (t, t_end), x, events=event, rtol=1e-11, atol=1e-12, method="DOP853")
        x, t = sol.y[:, -1], sol.t[-1]
        if sol.status == 1:
            held = x.copy()
            jumps += 1
    return x, jumps


x, jumps = target_from_zero()
print("target from 0: u(50) =", x[:2], "|u-u*| =", np.linalg.norm(x[:2] - U_STAR), "jumps =", jumps)

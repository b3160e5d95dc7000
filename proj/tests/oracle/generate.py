"""Independent reference values frozen into the C++ tests.

Plain numpy/scipy constructions (dense matrices, scipy.linalg.expm) and an
SDP for the trace-norm distance (cvxpy). Run: python3 generate.py
"""
import numpy as np
import scipy.linalg as sla
import cvxpy as cp


def ops(d):
    a = np.diag(np.sqrt(np.arange(1, d)), 1).astype(complex)
    return a, a.conj().T, np.eye(d, dtype=complex)


def coherent(alpha, d):
    v = np.zeros(d, complex)
    v[0] = 1.0
    for n in range(1, d):
        v[n] = v[n - 1] * alpha / np.sqrt(n)
    return v / np.linalg.norm(v)


def liouvillian(h, ls):
    d = h.shape[0]
    i = np.eye(d)
    m = -1j * (np.kron(i, h) - np.kron(h.T, i))
    for l in ls:
        ld = l.conj().T @ l
        m += np.kron(l.conj(), l) - 0.5 * np.kron(i, ld) - 0.5 * np.kron(ld.T, i)
    return m


def vec(x):
    return x.reshape(-1, order="F")


def unvec(v, d):
    return v.reshape(d, d, order="F")


def distance_sdp(rho, w):
    k = w.shape[1]
    tau = cp.Variable((k, k), hermitian=True)
    diff = rho - w @ tau @ w.conj().T
    prob = cp.Problem(cp.Minimize(cp.normNuc(diff)), [tau >> 0, cp.real(cp.trace(tau)) == 1])
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-11, tol_gap_rel=1e-11, tol_feas=1e-11)
    return prob.value


def main():
    np.set_printoptions(precision=17)
    # two-photon loss, alpha = 1, dim 30
    d = 30
    a, ad, i = ops(d)
    l = a @ a - i
    m = liouvillian(np.zeros((d, d)), [l])
    sv = np.linalg.svd(m, compute_uv=False)
    print("ex2 singular values (largest, smallest 6):", repr(sv[0]), repr(sv[-6:]))
    even = coherent(1.0, d) + coherent(-1.0, d)
    odd = coherent(1.0, d) - coherent(-1.0, d)
    w = np.linalg.qr(np.column_stack([even, odd]))[0]
    for name, psi in [("fock0", np.eye(d)[0]), ("fock1", np.eye(d)[1]), ("coh0.5", coherent(0.5, d)),
                      ("fock3", np.eye(d)[3])]:
        rho = np.outer(psi, psi.conj())
        print("ex2 distance", name, repr(distance_sdp(rho, w)))
    v = l.conj().T @ l
    rho0 = np.zeros((d, d), complex)
    rho0[0, 0] = 1
    for t in [0.5, 1.0, 2.0]:
        rt = unvec(sla.expm(t * m) @ vec(rho0), d)
        print("ex2 fock0 t=%g: tr(V rho)=%r  <a>=%r  <n>=%r" % (t, np.trace(v @ rt).real, np.trace(a @ rt),
                                                                np.trace(ad @ a @ rt).real))

    # displaced oscillator, kappa = 1, alpha = 0.8+0.4i, dim 40
    d = 40
    a, ad, i = ops(d)
    alpha = 0.8 + 0.4j
    b = a - alpha * i
    h = b.conj().T @ b
    m1 = liouvillian(h, [b])
    sv = np.linalg.svd(m1, compute_uv=False)
    print("ex1 singular values (largest, smallest 3):", repr(sv[0]), repr(sv[-3:]))
    beta = -1.0
    rho0 = np.outer(coherent(beta, d), coherent(beta, d).conj())
    for t in [1.0, 3.0]:
        rt = unvec(sla.expm(t * m1) @ vec(rho0), d)
        print("ex1 t=%g: <a>=%r closed=%r" % (t, np.trace(a @ rt), alpha + (beta - alpha) * np.exp(-(1j + 0.5) * t)))


if __name__ == "__main__":
    main()

//! Completely positive maps between qubit registers, and matrices of them
//! acting between sums of registers.

use crate::linalg::{CMatrix, C};
use crate::scalar::Real;
use crate::sim::embed;

/// A linear map on density matrices, as the matrix acting on row-major
/// vectorizations: `vec(E(ρ)) = m · vec(ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superop<T: Real> {
    pub qubits_in: usize,
    pub qubits_out: usize,
    pub m: CMatrix<T>,
}

impl<T: Real> Superop<T> {
    pub fn identity(n: usize) -> Self {
        Superop { qubits_in: n, qubits_out: n, m: CMatrix::identity(1 << (2 * n)) }
    }

    pub fn zero(qubits_in: usize, qubits_out: usize) -> Self {
        Superop { qubits_in, qubits_out, m: CMatrix::zeros(1 << (2 * qubits_out), 1 << (2 * qubits_in)) }
    }

    /// `ρ ↦ Σ K ρ K†`.
    pub fn from_kraus(qubits_in: usize, qubits_out: usize, ks: &[CMatrix<T>]) -> Self {
        let mut s = Self::zero(qubits_in, qubits_out);
        for k in ks {
            assert_eq!((k.rows(), k.cols()), (1 << qubits_out, 1 << qubits_in), "Kraus operator has the wrong shape");
            s.m = s.m.add(&k.kron(&k.conj()));
        }
        s
    }

    pub fn unitary(u: &CMatrix<T>) -> Self {
        let n = crate::linalg::qubits_of_dim(u.rows()).expect("unitary on qubits");
        Self::from_kraus(n, n, std::slice::from_ref(u))
    }

    /// The gate `u` applied to the qubits at `pos` of an `n`-qubit register.
    pub fn gate(u: &CMatrix<T>, pos: &[usize], n: usize) -> Self {
        Self::unitary(&embed(u, pos, n))
    }

    /// Appends a qubit prepared in basis state `b` after the existing `n`.
    pub fn append_basis(n: usize, b: usize) -> Self {
        let d = 1usize << n;
        let k = CMatrix::from_fn(2 * d, d, |r, c| {
            if r == 2 * c + b {
                C::new(T::one(), T::zero())
            } else {
                C::new(T::zero(), T::zero())
            }
        });
        Self::from_kraus(n, n + 1, &[k])
    }

    /// Projection of qubit `pos` onto basis state `b`, keeping the qubit.
    pub fn project(n: usize, pos: usize, b: usize) -> Self {
        let d = 1usize << n;
        let k = CMatrix::from_fn(d, d, |r, c| {
            if r == c && (r >> (n - 1 - pos)) & 1 == b {
                C::new(T::one(), T::zero())
            } else {
                C::new(T::zero(), T::zero())
            }
        });
        Self::from_kraus(n, n, &[k])
    }

    /// Traces out qubit `pos`.
    pub fn discard(n: usize, pos: usize) -> Self {
        let d_out = 1usize << (n - 1);
        let low = n - 1 - pos;
        let ks: Vec<CMatrix<T>> = (0..2)
            .map(|bit| {
                CMatrix::from_fn(d_out, 1 << n, |r, c| {
                    let hi = r >> low;
                    let lo = r & ((1 << low) - 1);
                    if c == (hi << (low + 1)) | (bit << low) | lo {
                        C::new(T::one(), T::zero())
                    } else {
                        C::new(T::zero(), T::zero())
                    }
                })
            })
            .collect();
        Self::from_kraus(n, n - 1, &ks)
    }

    /// Reorders qubits: output qubit `i` is input qubit `perm[i]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let d = 1usize << n;
        let map = |out: usize| {
            let mut inp = 0;
            for (i, &p) in perm.iter().enumerate() {
                let b = (out >> (n - 1 - i)) & 1;
                inp |= b << (n - 1 - p);
            }
            inp
        };
        let u = CMatrix::from_fn(d, d, |r, c| {
            if map(r) == c {
                C::new(T::one(), T::zero())
            } else {
                C::new(T::zero(), T::zero())
            }
        });
        Self::from_kraus(n, n, &[u])
    }

    /// `self ∘ before`.
    pub fn after(&self, before: &Superop<T>) -> Self {
        assert_eq!(self.qubits_in, before.qubits_out, "composing maps of incompatible registers");
        Superop { qubits_in: before.qubits_in, qubits_out: self.qubits_out, m: self.m.mul(&before.m) }
    }

    pub fn add(&self, other: &Superop<T>) -> Self {
        Superop { qubits_in: self.qubits_in, qubits_out: self.qubits_out, m: self.m.add(&other.m) }
    }

    /// `self ⊗ other`, the qubits of `self` first.
    pub fn tensor(&self, other: &Superop<T>) -> Self {
        let (ai, ao, bi, bo) = (1usize << self.qubits_in, 1usize << self.qubits_out, 1usize << other.qubits_in, 1usize << other.qubits_out);
        let (di, do_) = (ai * bi, ao * bo);
        let mut m = CMatrix::zeros(do_ * do_, di * di);
        for ra in 0..ao {
            for ca in 0..ao {
                for ia in 0..ai {
                    for ja in 0..ai {
                        let x = self.m[(ra * ao + ca, ia * ai + ja)];
                        if x.re == T::zero() && x.im == T::zero() {
                            continue;
                        }
                        for rb in 0..bo {
                            for cb in 0..bo {
                                let r = (ra * bo + rb) * do_ + (ca * bo + cb);
                                for ib in 0..bi {
                                    for jb in 0..bi {
                                        let y = other.m[(rb * bo + cb, ib * bi + jb)];
                                        let col = (ia * bi + ib) * di + (ja * bi + jb);
                                        m[(r, col)] += x * y;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        Superop { qubits_in: self.qubits_in + other.qubits_in, qubits_out: self.qubits_out + other.qubits_out, m }
    }

    pub fn apply(&self, rho: &CMatrix<T>) -> CMatrix<T> {
        let din = 1usize << self.qubits_in;
        let dout = 1usize << self.qubits_out;
        assert_eq!(rho.rows(), din, "state has the wrong dimension");
        let v = CMatrix::from_fn(din * din, 1, |r, _| rho[(r / din, r % din)]);
        let w = self.m.mul(&v);
        CMatrix::from_fn(dout, dout, |r, c| w[(r * dout + c, 0)])
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, input factor first.
    pub fn choi(&self) -> CMatrix<T> {
        let din = 1usize << self.qubits_in;
        let dout = 1usize << self.qubits_out;
        CMatrix::from_fn(din * dout, din * dout, |r, c| {
            let (i, a) = (r / dout, r % dout);
            let (j, b) = (c / dout, c % dout);
            self.m[(a * dout + b, i * din + j)]
        })
    }

    pub fn from_choi(qubits_in: usize, qubits_out: usize, choi: &CMatrix<T>) -> Self {
        let din = 1usize << qubits_in;
        let dout = 1usize << qubits_out;
        let m = CMatrix::from_fn(dout * dout, din * din, |r, c| {
            let (a, b) = (r / dout, r % dout);
            let (i, j) = (c / din, c % din);
            choi[(i * dout + a, j * dout + b)]
        });
        Superop { qubits_in, qubits_out, m }
    }

    pub fn is_negligible(&self, tol: T) -> bool {
        self.m.max_abs() <= tol
    }

    pub fn max_abs_diff(&self, other: &Superop<T>) -> T {
        if (self.qubits_in, self.qubits_out) != (other.qubits_in, other.qubits_out) {
            return T::infinity();
        }
        self.m.max_abs_diff(&other.m)
    }
}

/// Leaf shape of a sum of registers: the qubit count of each summand.
pub type BranchShape = Vec<usize>;

/// A morphism between sums of registers: `comps[i][j]` maps summand `i` of
/// the domain into summand `j` of the codomain; `None` is the zero map.
#[derive(Clone, Debug, PartialEq)]
pub struct MMorphism<T: Real> {
    pub dom: BranchShape,
    pub cod: BranchShape,
    pub comps: Vec<Vec<Option<Superop<T>>>>,
}

impl<T: Real> MMorphism<T> {
    pub fn zero(dom: BranchShape, cod: BranchShape) -> Self {
        let comps = vec![vec![None; cod.len()]; dom.len()];
        MMorphism { dom, cod, comps }
    }

    pub fn identity(shape: &[usize]) -> Self {
        let mut m = Self::zero(shape.to_vec(), shape.to_vec());
        for (i, &n) in shape.iter().enumerate() {
            m.comps[i][i] = Some(Superop::identity(n));
        }
        m
    }

    /// A morphism between single registers.
    pub fn single(s: Superop<T>) -> Self {
        MMorphism { dom: vec![s.qubits_in], cod: vec![s.qubits_out], comps: vec![vec![Some(s)]] }
    }

    /// Moves summand `i` of the domain to summand `perm_target[i]` of the codomain.
    pub fn leaf_permutation(dom: &[usize], target: &[usize]) -> Self {
        let mut cod = vec![0; dom.len()];
        for (i, &t) in target.iter().enumerate() {
            cod[t] = dom[i];
        }
        let mut m = Self::zero(dom.to_vec(), cod);
        for (i, &t) in target.iter().enumerate() {
            m.comps[i][t] = Some(Superop::identity(dom[i]));
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Superop<T>> {
        self.comps[i][j].as_ref()
    }

    /// `self ∘ before`.
    pub fn after(&self, before: &MMorphism<T>) -> MMorphism<T> {
        assert_eq!(before.cod, self.dom, "composing morphisms with mismatched shapes");
        let mut out = Self::zero(before.dom.clone(), self.cod.clone());
        for i in 0..before.dom.len() {
            for j in 0..before.cod.len() {
                let Some(f) = &before.comps[i][j] else { continue };
                for k in 0..self.cod.len() {
                    let Some(g) = &self.comps[j][k] else { continue };
                    let gf = g.after(f);
                    out.comps[i][k] = Some(match out.comps[i][k].take() {
                        Some(acc) => acc.add(&gf),
                        None => gf,
                    });
                }
            }
        }
        out
    }

    /// Tensor product; summands are ordered with the left factor major.
    pub fn tensor(&self, other: &MMorphism<T>) -> MMorphism<T> {
        let prod = |a: &[usize], b: &[usize]| a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect::<Vec<_>>();
        let mut out = Self::zero(prod(&self.dom, &other.dom), prod(&self.cod, &other.cod));
        let (bd, bc) = (other.dom.len(), other.cod.len());
        for i in 0..self.dom.len() {
            for j in 0..self.cod.len() {
                let Some(f) = &self.comps[i][j] else { continue };
                for k in 0..bd {
                    for l in 0..bc {
                        let Some(g) = &other.comps[k][l] else { continue };
                        out.comps[i * bd + k][j * bc + l] = Some(f.tensor(g));
                    }
                }
            }
        }
        out
    }

    /// Acts blockwise: summands of the domains and codomains are concatenated.
    pub fn block_diag(parts: &[MMorphism<T>]) -> MMorphism<T> {
        let dom: Vec<usize> = parts.iter().flat_map(|p| p.dom.iter().copied()).collect();
        let cod: Vec<usize> = parts.iter().flat_map(|p| p.cod.iter().copied()).collect();
        let mut out = Self::zero(dom, cod);
        let (mut di, mut ci) = (0, 0);
        for p in parts {
            for i in 0..p.dom.len() {
                for j in 0..p.cod.len() {
                    out.comps[di + i][ci + j] = p.comps[i][j].clone();
                }
            }
            di += p.dom.len();
            ci += p.cod.len();
        }
        out
    }

    /// Copairing: the domain is the concatenation of the parts' domains, all
    /// sharing one codomain.
    pub fn copair(parts: &[MMorphism<T>]) -> MMorphism<T> {
        let cod = parts.first().map(|p| p.cod.clone()).unwrap_or_default();
        let dom: Vec<usize> = parts.iter().flat_map(|p| p.dom.iter().copied()).collect();
        let mut out = Self::zero(dom, cod.clone());
        let mut di = 0;
        for p in parts {
            assert_eq!(p.cod, cod, "copairing morphisms with different codomains");
            for i in 0..p.dom.len() {
                out.comps[di + i] = p.comps[i].clone();
            }
            di += p.dom.len();
        }
        out
    }

    pub fn max_abs_diff(&self, other: &MMorphism<T>) -> T {
        if self.dom != other.dom || self.cod != other.cod {
            return T::infinity();
        }
        let mut worst = T::zero();
        for i in 0..self.dom.len() {
            for j in 0..self.cod.len() {
                let d = match (&self.comps[i][j], &other.comps[i][j]) {
                    (None, None) => T::zero(),
                    (Some(a), None) | (None, Some(a)) => a.m.max_abs(),
                    (Some(a), Some(b)) => a.max_abs_diff(b),
                };
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn approx_eq(&self, other: &MMorphism<T>, tol: T) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn hadamard() -> CMatrix<f64> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_f64(2, 2, &[(r, 0.), (r, 0.), (r, 0.), (-r, 0.)])
    }

    #[test]
    fn superop_matches_conjugation() {
        let h = hadamard();
        let rho = CMatrix::from_f64(2, 2, &[(0.7, 0.), (0.1, 0.2), (0.1, -0.2), (0.3, 0.)]);
        let direct = h.mul(&rho).mul(&h.adjoint());
        assert!(Superop::unitary(&h).apply(&rho).approx_eq(&direct, 1e-12));
    }

    #[test]
    fn choi_round_trip() {
        let s = Superop::<f64>::discard(2, 1).after(&Superop::gate(&hadamard(), &[0], 2));
        let back = Superop::from_choi(2, 1, &s.choi());
        assert!(back.max_abs_diff(&s) < 1e-14);
    }

    #[test]
    fn tensor_agrees_with_kraus_kron() {
        let h = hadamard();
        let x = CMatrix::from_f64(2, 2, &[(0., 0.), (1., 0.), (1., 0.), (0., 0.)]);
        let a = Superop::unitary(&h).tensor(&Superop::unitary(&x));
        let b = Superop::unitary(&h.kron(&x));
        assert!(a.max_abs_diff(&b) < 1e-14);
    }

    #[test]
    fn discard_is_partial_trace() {
        let rho = CMatrix::<f64>::from_f64(2, 2, &[(0.25, 0.), (0.1, 0.), (0.1, 0.), (0.75, 0.)]).kron(&CMatrix::from_f64(
            2,
            2,
            &[(0.5, 0.), (0.5, 0.), (0.5, 0.), (0.5, 0.)],
        ));
        let out = Superop::discard(2, 1).apply(&rho);
        assert!((out[(0, 0)] - c(0.25, 0.)).norm() < 1e-14 && (out[(0, 1)] - c(0.1, 0.)).norm() < 1e-14);
    }

    #[test]
    fn permutation_swaps() {
        let s = Superop::<f64>::permutation(&[1, 0]);
        let rho = crate::sim::ket_bra::<f64>(1).kron(&crate::sim::ket_bra(0));
        let out = s.apply(&rho);
        assert!(out.approx_eq(&crate::sim::ket_bra::<f64>(0).kron(&crate::sim::ket_bra(1)), 1e-14));
    }
}

//! Exact combinatorics of the group of 2-torsion points.
//!
//! The group is `K = (Z/2)^{2g}`, represented throughout by the
//! half-characteristic `(eps, delta)` of the point `(tau*eps + delta)/2`;
//! no floating representation is stored. Addition is componentwise xor, and
//! the Weil pairing induced by the polarization is, in this basis,
//! `<(e,d), (e',d')> = e.d' + e'.d mod 2`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::theta::{HalfCharacteristic, RiemannMatrix};

/// A point of order two, named by its half-characteristic.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct TorsionPoint {
    chr: HalfCharacteristic,
}

impl TorsionPoint {
    pub fn new(chr: HalfCharacteristic) -> Self {
        Self { chr }
    }

    pub fn from_index(g: usize, index: usize) -> Result<Self> {
        Ok(Self {
            chr: HalfCharacteristic::from_index(g, index)?,
        })
    }

    pub fn chr(&self) -> &HalfCharacteristic {
        &self.chr
    }

    pub fn g(&self) -> usize {
        self.chr.g()
    }

    /// Canonical index in `[0, 4^g)`: eps high bits, delta low bits.
    pub fn index(&self) -> usize {
        self.chr.index()
    }

    /// Group law: xor of characteristics (the embedded points differ from
    /// the xor representative by a full lattice vector).
    pub fn add(&self, other: &TorsionPoint) -> Result<TorsionPoint> {
        if self.g() != other.g() {
            return Err(Error::DimensionMismatch {
                expected: self.g(),
                got: other.g(),
            });
        }
        Ok(Self {
            chr: HalfCharacteristic::from_masks(
                self.g(),
                self.chr.eps_mask() ^ other.chr.eps_mask(),
                self.chr.delta_mask() ^ other.chr.delta_mask(),
            )?,
        })
    }

    /// Embed as the point `(tau*eps + delta)/2` of `C^g`.
    pub fn embed<R: Real>(&self, tau: &RiemannMatrix<R>) -> Result<Vec<Complex<R>>> {
        tau.half_period(&self.chr)
    }
}

/// All `4^g` torsion points in canonical index order.
pub fn all_points(g: usize) -> impl Iterator<Item = TorsionPoint> {
    (0..1usize << (2 * g)).map(move |i| TorsionPoint::from_index(g, i).expect("index in range"))
}

/// The symplectic pairing `<x, y> = eps_x . delta_y + eps_y . delta_x mod 2`.
pub fn pairing(x: &TorsionPoint, y: &TorsionPoint) -> Result<u8> {
    if x.g() != y.g() {
        return Err(Error::DimensionMismatch {
            expected: x.g(),
            got: y.g(),
        });
    }
    let a = (x.chr().eps_mask() & y.chr().delta_mask()).count_ones();
    let b = (y.chr().eps_mask() & x.chr().delta_mask()).count_ones();
    Ok(((a + b) & 1) as u8)
}

/// A basis `a_1..a_g, b_1..b_g` of `K` with `<a_i, b_j> = delta_ij` and both
/// halves isotropic.
#[derive(Clone, Debug)]
pub struct SymplecticBasis {
    pub a: Vec<TorsionPoint>,
    pub b: Vec<TorsionPoint>,
}

/// The distinguished basis: `a_i = (e_i, 0)`, `b_i = (0, e_i)`.
pub fn standard_basis(g: usize) -> Result<SymplecticBasis> {
    let mut a = Vec::with_capacity(g);
    let mut b = Vec::with_capacity(g);
    for i in 0..g {
        a.push(TorsionPoint::new(HalfCharacteristic::from_masks(
            g,
            1 << i,
            0,
        )?));
        b.push(TorsionPoint::new(HalfCharacteristic::from_masks(
            g,
            0,
            1 << i,
        )?));
    }
    Ok(SymplecticBasis { a, b })
}

/// The coset `H_b = { (eps, b) : eps in {0,1}^g }` of the maximal isotropic
/// subgroup `H = <a_1..a_g>`; the `2^g` cosets partition `K`.
pub fn coset(g: usize, b_bits: u32) -> Result<Vec<TorsionPoint>> {
    if g == 0 || g > 12 || b_bits >= 1u32 << g {
        return Err(Error::InvalidParameter(format!(
            "coset label {b_bits} out of range for g = {g}"
        )));
    }
    (0..1u32 << g)
        .map(|eps| {
            Ok(TorsionPoint::new(HalfCharacteristic::from_masks(
                g, eps, b_bits,
            )?))
        })
        .collect()
}

/// Counts of odd and even characteristics, by enumeration.
pub fn parity_counts(g: usize) -> (u64, u64) {
    let mut odd = 0u64;
    for p in all_points(g) {
        odd += u64::from(p.chr().parity());
    }
    let total = 1u64 << (2 * g);
    (odd, total - odd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_basis_pairings_are_symplectic() {
        for g in 1..=3usize {
            let basis = standard_basis(g).unwrap();
            for i in 0..g {
                for j in 0..g {
                    let expect = u8::from(i == j);
                    assert_eq!(pairing(&basis.a[i], &basis.b[j]).unwrap(), expect);
                    assert_eq!(pairing(&basis.a[i], &basis.a[j]).unwrap(), 0);
                    assert_eq!(pairing(&basis.b[i], &basis.b[j]).unwrap(), 0);
                }
            }
        }
    }

    #[test]
    fn pairing_is_alternating() {
        for x in all_points(2) {
            assert_eq!(pairing(&x, &x).unwrap(), 0);
        }
    }

    #[test]
    fn pairing_is_nondegenerate_up_to_g3() {
        for g in 1..=3usize {
            for x in all_points(g) {
                if x.index() == 0 {
                    continue;
                }
                let paired = all_points(g).any(|y| pairing(&x, &y).unwrap() == 1);
                assert!(paired, "g={g}, x={}", x.index());
            }
        }
    }

    #[test]
    fn pairing_rejects_mixed_genus() {
        let x = TorsionPoint::from_index(1, 1).unwrap();
        let y = TorsionPoint::from_index(2, 1).unwrap();
        assert!(pairing(&x, &y).is_err());
    }

    #[test]
    fn cosets_partition_the_group() {
        for g in 1..=3usize {
            let mut seen = vec![false; 1 << (2 * g)];
            for b in 0..1u32 << g {
                let cs = coset(g, b).unwrap();
                assert_eq!(cs.len(), 1 << g);
                for p in cs {
                    assert!(!seen[p.index()], "coset overlap at index {}", p.index());
                    seen[p.index()] = true;
                }
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn coset_of_zero_is_the_subgroup_itself() {
        let h = coset(2, 0).unwrap();
        let indices: Vec<usize> = h.iter().map(|p| p.index()).collect();
        // (eps, 0) for eps = 00, 01, 10, 11 -> indices 0, 4, 8, 12
        assert_eq!(indices, vec![0, 4, 8, 12]);
    }

    #[test]
    fn parity_counts_match_closed_form() {
        for g in 1..=8usize {
            let (odd, even) = parity_counts(g);
            let expect_odd = (1u64 << (g - 1)) * ((1u64 << g) - 1);
            let expect_even = (1u64 << (g - 1)) * ((1u64 << g) + 1);
            assert_eq!(odd, expect_odd, "g={g}");
            assert_eq!(even, expect_even, "g={g}");
            assert_eq!(odd + even, 1u64 << (2 * g));
        }
    }

    #[test]
    fn g1_and_g2_counts_are_the_classical_ones() {
        assert_eq!(parity_counts(1), (1, 3));
        assert_eq!(parity_counts(2), (6, 10));
        assert_eq!(parity_counts(3), (28, 36));
    }

    #[test]
    fn doubling_lands_in_the_lattice() {
        // 2x = tau*eps + delta must be an integer combination of lattice
        // generators: exact by construction, checked via the embedding.
        let tau = RiemannMatrix::new(
            2,
            vec![
                num_complex::Complex::new(0.3, 1.0),
                num_complex::Complex::new(0.1, 0.2),
                num_complex::Complex::new(0.1, 0.2),
                num_complex::Complex::new(-0.2, 1.5),
            ],
        )
        .unwrap();
        for p in all_points(2) {
            let x = p.embed(&tau).unwrap();
            // 2x - delta must equal tau * eps exactly
            for i in 0..2 {
                let mut expect = num_complex::Complex::new(0.0, 0.0);
                for j in 0..2 {
                    if p.chr().eps_bit(j) {
                        expect += tau.entry(i, j);
                    }
                }
                let mut got = x[i] + x[i];
                if p.chr().delta_bit(i) {
                    got -= num_complex::Complex::new(1.0, 0.0);
                }
                assert!((got - expect).norm() < 1e-15);
            }
        }
    }
}

//! Shamir `(t, kappa)` threshold secret sharing.
//!
//! A secret `x` is shared by sampling a random degree-`t` polynomial `f` with
//! `f(0) = x`; peer `j` (0-based) holds the evaluation `f(j+1)`. Any `t+1`
//! shares reconstruct the secret by Lagrange interpolation at zero, any `t`
//! or fewer are independent of it. Linear combinations of sharings are
//! computed locally on the shares.

use crate::field::PrimeField;
use rand::RngCore;
use thiserror::Error;

/// 0-based peer index; the Shamir evaluation point is `id + 1`.
pub type PartyId = usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShareError {
    #[error("need at least {need} shares, got {got}")]
    InsufficientShares { need: usize, got: usize },
    #[error("shares from duplicate party {0}")]
    DuplicateParty(PartyId),
    #[error("party id {0} out of range")]
    PartyOutOfRange(PartyId),
    #[error("shares do not lie on a degree-{0} polynomial")]
    Inconsistent(usize),
    #[error("invalid parameters: kappa={kappa}, t={t} (need kappa >= 2t+1, t >= 1)")]
    BadParameters { kappa: usize, t: usize },
    #[error("value out of the signed range for this field")]
    SignedRange,
}

/// One peer's share, tagged with the peer it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecretShare<F> {
    pub party: PartyId,
    pub point: F,
}

/// Sharing/reconstruction parameters, with the Lagrange weights for
/// interpolating at zero from all `kappa` points precomputed (these are what
/// degree reduction after a multiplication uses).
#[derive(Debug, Clone)]
pub struct Shamir<F> {
    kappa: usize,
    t: usize,
    lagrange_all: Vec<F>,
}

impl<F: PrimeField> Shamir<F> {
    pub fn new(kappa: usize, t: usize) -> Result<Self, ShareError> {
        if t < 1 || kappa < 2 * t + 1 {
            return Err(ShareError::BadParameters { kappa, t });
        }
        let ids: Vec<PartyId> = (0..kappa).collect();
        let lagrange_all = lagrange_weights_at_zero::<F>(&ids);
        Ok(Shamir {
            kappa,
            t,
            lagrange_all,
        })
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn threshold(&self) -> usize {
        self.t
    }

    /// Lagrange weights at zero over all `kappa` evaluation points; suitable
    /// for recombining any polynomial of degree `< kappa`, in particular the
    /// degree-`2t` product polynomial.
    pub fn lagrange_all(&self) -> &[F] {
        &self.lagrange_all
    }

    /// Share a field element: returns the share of every peer, in peer order.
    pub fn share<R: RngCore + ?Sized>(&self, secret: F, rng: &mut R) -> Vec<F> {
        let mut coeffs = Vec::with_capacity(self.t + 1);
        coeffs.push(secret);
        for _ in 0..self.t {
            coeffs.push(F::sample(rng));
        }
        (0..self.kappa)
            .map(|j| eval_poly(&coeffs, F::from_u64(j as u64 + 1)))
            .collect()
    }

    /// Share a signed integer. Errors when `|x|` does not fit the field's
    /// signed range.
    pub fn share_i128<R: RngCore + ?Sized>(
        &self,
        x: i128,
        rng: &mut R,
    ) -> Result<Vec<F>, ShareError> {
        let enc = F::from_i128(x);
        if enc.to_i128() != Some(x) {
            return Err(ShareError::SignedRange);
        }
        Ok(self.share(enc, rng))
    }

    /// Reconstruct from at least `t+1` shares of distinct peers.
    pub fn reconstruct(&self, shares: &[SecretShare<F>]) -> Result<F, ShareError> {
        if shares.len() < self.t + 1 {
            return Err(ShareError::InsufficientShares {
                need: self.t + 1,
                got: shares.len(),
            });
        }
        let mut seen = vec![false; self.kappa];
        for s in shares {
            if s.party >= self.kappa {
                return Err(ShareError::PartyOutOfRange(s.party));
            }
            if seen[s.party] {
                return Err(ShareError::DuplicateParty(s.party));
            }
            seen[s.party] = true;
        }
        let pts: Vec<PartyId> = shares[..self.t + 1].iter().map(|s| s.party).collect();
        let w = lagrange_weights_at_zero::<F>(&pts);
        let mut acc = F::zero();
        for (s, wi) in shares[..self.t + 1].iter().zip(w) {
            acc = acc + s.point * wi;
        }
        Ok(acc)
    }

    /// Reconstruct and verify that *all* provided points lie on one
    /// degree-`t` polynomial. This is the check every peer runs on a public
    /// opening to detect divergence.
    pub fn reconstruct_checked(&self, shares: &[SecretShare<F>]) -> Result<F, ShareError> {
        let secret = self.reconstruct(shares)?;
        // interpolate the full polynomial from the first t+1 points and test
        // the remaining ones
        let base = &shares[..self.t + 1];
        for probe in &shares[self.t + 1..] {
            let x = F::from_u64(probe.party as u64 + 1);
            let mut acc = F::zero();
            for (i, si) in base.iter().enumerate() {
                let xi = F::from_u64(si.party as u64 + 1);
                let mut num = F::one();
                let mut den = F::one();
                for (j, sj) in base.iter().enumerate() {
                    if i != j {
                        let xj = F::from_u64(sj.party as u64 + 1);
                        num = num * (x - xj);
                        den = den * (xi - xj);
                    }
                }
                acc = acc + si.point * num * den.inv().expect("distinct points");
            }
            if acc != probe.point {
                return Err(ShareError::Inconsistent(self.t));
            }
        }
        Ok(secret)
    }

    /// Signed reconstruction.
    pub fn reconstruct_i128(&self, shares: &[SecretShare<F>]) -> Result<i128, ShareError> {
        self.reconstruct(shares)?
            .to_i128()
            .ok_or(ShareError::SignedRange)
    }
}

/// A single peer's handle on a secret-shared value.
///
/// Addition, subtraction, negation and multiplication by *public* scalars
/// are local share operations; multiplying two `Sh` values requires the
/// interactive protocol in `primitives`, which is why no `Mul<Sh>` impl
/// exists.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Sh<F>(pub F);

impl<F: PrimeField> Sh<F> {
    /// Degree-0 sharing of a public constant (every peer holds `c`).
    pub fn constant(c: F) -> Self {
        Sh(c)
    }

    pub fn constant_u64(c: u64) -> Self {
        Sh(F::from_u64(c))
    }

    pub fn constant_i128(c: i128) -> Self {
        Sh(F::from_i128(c))
    }

    pub fn zero() -> Self {
        Sh(F::zero())
    }
}

impl<F: PrimeField> std::ops::Add for Sh<F> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Sh(self.0 + o.0)
    }
}

impl<F: PrimeField> std::ops::Sub for Sh<F> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Sh(self.0 - o.0)
    }
}

impl<F: PrimeField> std::ops::Neg for Sh<F> {
    type Output = Self;
    fn neg(self) -> Self {
        Sh(-self.0)
    }
}

/// Public scalar times a share.
impl<F: PrimeField> std::ops::Mul<F> for Sh<F> {
    type Output = Self;
    fn mul(self, a: F) -> Self {
        Sh(self.0 * a)
    }
}

/// Adding a public constant to a share.
impl<F: PrimeField> std::ops::Add<F> for Sh<F> {
    type Output = Self;
    fn add(self, c: F) -> Self {
        Sh(self.0 + c)
    }
}

/// Subtracting a public constant from a share.
impl<F: PrimeField> std::ops::Sub<F> for Sh<F> {
    type Output = Self;
    fn sub(self, c: F) -> Self {
        Sh(self.0 - c)
    }
}

fn eval_poly<F: PrimeField>(coeffs: &[F], x: F) -> F {
    let mut acc = F::zero();
    for c in coeffs.iter().rev() {
        acc = acc * x + *c;
    }
    acc
}

/// Lagrange weights for interpolation at zero given the 0-based party ids.
pub fn lagrange_weights_at_zero<F: PrimeField>(parties: &[PartyId]) -> Vec<F> {
    parties
        .iter()
        .map(|&i| {
            let xi = F::from_u64(i as u64 + 1);
            let mut num = F::one();
            let mut den = F::one();
            for &j in parties {
                if j != i {
                    let xj = F::from_u64(j as u64 + 1);
                    num = num * xj;
                    den = den * (xj - xi);
                }
            }
            num * den.inv().expect("distinct evaluation points")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{F127, Fp};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn tagged<F: Copy>(shares: &[F], parties: &[usize]) -> Vec<SecretShare<F>> {
        parties
            .iter()
            .map(|&p| SecretShare {
                party: p,
                point: shares[p],
            })
            .collect()
    }

    #[test]
    fn zero_round_trip() {
        let s = Shamir::<F127>::new(3, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let shares = s.share_i128(0, &mut rng).unwrap();
        assert_eq!(s.reconstruct_i128(&tagged(&shares, &[0, 1])).unwrap(), 0);
    }

    #[test]
    fn negative_encodes_as_p_minus_x() {
        let s = Shamir::<F127>::new(3, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let shares = s.share_i128(-1, &mut rng).unwrap();
        let raw = s.reconstruct(&tagged(&shares, &[1, 2])).unwrap();
        assert_eq!(raw, -F127::one()); // p - 1
        assert_eq!(raw.to_i128(), Some(-1));
    }

    #[test]
    fn any_two_of_three_round_trip() {
        let s = Shamir::<F127>::new(3, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x: i128 = rng.gen_range(-(1i128 << 62)..(1i128 << 62));
            let shares = s.share_i128(x, &mut rng).unwrap();
            for subset in [[0, 1], [0, 2], [1, 2]] {
                assert_eq!(s.reconstruct_i128(&tagged(&shares, &subset)).unwrap(), x);
            }
        }
    }

    #[test]
    fn subset_independence_and_threshold() {
        let s = Shamir::<F127>::new(3, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let shares = s.share_i128(7, &mut rng).unwrap();
        assert_eq!(s.reconstruct_i128(&tagged(&shares, &[0, 1])).unwrap(), 7);
        assert_eq!(s.reconstruct_i128(&tagged(&shares, &[1, 2])).unwrap(), 7);
        let one = tagged(&shares, &[1]);
        assert_eq!(
            s.reconstruct(&one).unwrap_err(),
            ShareError::InsufficientShares { need: 2, got: 1 }
        );
    }

    #[test]
    fn checked_reconstruction_rejects_tampering() {
        let s = Shamir::<F127>::new(3, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let shares = s.share_i128(42, &mut rng).unwrap();
        let mut pts = tagged(&shares, &[0, 1, 2]);
        assert_eq!(
            s.reconstruct_checked(&pts).unwrap().to_i128(),
            Some(42)
        );
        pts[2].point = pts[2].point + F127::one();
        assert_eq!(
            s.reconstruct_checked(&pts).unwrap_err(),
            ShareError::Inconsistent(1)
        );
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(Shamir::<F127>::new(2, 1).is_err()); // kappa < 2t+1
        assert!(Shamir::<F127>::new(3, 0).is_err());
        assert!(Shamir::<F127>::new(5, 2).is_ok());
    }

    #[test]
    fn five_party_threshold_two() {
        let s = Shamir::<F127>::new(5, 2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let shares = s.share_i128(-123456789, &mut rng).unwrap();
        assert_eq!(
            s.reconstruct_i128(&tagged(&shares, &[0, 2, 4])).unwrap(),
            -123456789
        );
        assert_eq!(
            s.reconstruct_i128(&tagged(&shares, &[1, 2, 3])).unwrap(),
            -123456789
        );
    }

    /// Marginal distribution of a single share is uniform: chi-square over a
    /// small field.
    #[test]
    fn share_marginal_uniform() {
        const P: u64 = 31;
        let s = Shamir::<Fp<P>>::new(3, 1).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let n = 31_000usize;
        let mut counts = [0usize; 31];
        for _ in 0..n {
            let shares = s.share(Fp::<P>::from_u64(5), &mut rng);
            counts[shares[1].to_limbs_le()[0] as usize] += 1;
        }
        let expect = n as f64 / P as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expect;
                d * d / expect
            })
            .sum();
        // df = 30, alpha = 0.001 critical value ~ 59.7
        assert!(chi2 < 59.7, "chi2 = {chi2}");
    }
}

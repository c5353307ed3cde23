//! Oblivious compatibility checks and adjacency-matrix construction.

use super::quotes::QuoteShares;
use crate::field::PrimeField;
use crate::primitives::{gtz_batch, mul_batch};
use crate::runtime::PeerCtx;
use crate::shamir::Sh;
use crate::Result;

/// Bit bound for the indicator sums compared here (bloodtype sums are at
/// most 4, antigen sums at most the vector length).
fn sum_bits(len: usize) -> u32 {
    (usize::BITS - len.leading_zeros()) + 1
}

/// Shared compatibility bit for donor of `donor` and patient of `patient`:
/// `[sum_k Bd(k)*Bp(k) >= 1] * [sum_k Ad(k)*Ap(k) == 0]`, one comparison
/// per sum.
pub fn comp_check<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    donor: &QuoteShares<F>,
    patient: &QuoteShares<F>,
) -> Result<Sh<F>> {
    Ok(comp_check_batch(ctx, &[(donor, patient)])?[0])
}

/// Batched compatibility bits for ordered (donor, patient) pairs.
pub fn comp_check_batch<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    pairs: &[(&QuoteShares<F>, &QuoteShares<F>)],
) -> Result<Vec<Sh<F>>> {
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let hla_len = pairs[0].0.donor_antigens.len();
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for (d, p) in pairs {
        assert_eq!(d.donor_antigens.len(), hla_len);
        assert_eq!(p.patient_antibodies.len(), hla_len);
        lhs.extend_from_slice(&d.donor_bloodtype);
        rhs.extend_from_slice(&p.patient_accepts);
        lhs.extend_from_slice(&d.donor_antigens);
        rhs.extend_from_slice(&p.patient_antibodies);
    }
    let prods = mul_batch(ctx, &lhs, &rhs)?;
    let stride = 4 + hla_len;
    let mut blood_sums = Vec::with_capacity(pairs.len());
    let mut antigen_sums = Vec::with_capacity(pairs.len());
    for k in 0..pairs.len() {
        let chunk = &prods[k * stride..(k + 1) * stride];
        blood_sums.push(chunk[..4].iter().fold(Sh(F::zero()), |a, &b| a + b));
        antigen_sums.push(chunk[4..].iter().fold(Sh(F::zero()), |a, &b| a + b));
    }
    // [blood_sum > 0] and [antigen_sum > 0] in one comparison layer
    let mut sums = blood_sums;
    sums.extend(antigen_sums);
    let bits = gtz_batch(ctx, &sums, sum_bits(hla_len.max(4)))?;
    let (blood_ok, crossmatch) = bits.split_at(pairs.len());
    let one = F::one();
    let no_conflict: Vec<Sh<F>> = crossmatch.iter().map(|&b| Sh(one) - b).collect();
    mul_batch(ctx, blood_ok, &no_conflict)
}

/// The shared adjacency matrix: entry `(i, j)` is the compatibility of
/// pair `i`'s donor with pair `j`'s patient; the diagonal is zero.
pub fn build_adjacency<F: PrimeField>(
    ctx: &mut PeerCtx<F>,
    quotes: &[QuoteShares<F>],
) -> Result<Vec<Vec<Sh<F>>>> {
    let n = quotes.len();
    let mut pairs = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                pairs.push((&quotes[i], &quotes[j]));
            }
        }
    }
    let bits = comp_check_batch(ctx, &pairs)?;
    let mut m = vec![vec![Sh(F::zero()); n]; n];
    let mut it = bits.into_iter();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                m[i][j] = it.next().expect("one bit per ordered pair");
            }
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::F127;
    use crate::kep::quotes::{deal_quotes, plain_adjacency, MedicalQuote};
    use crate::runtime::{run_session, SessionConfig};
    use crate::shamir::Shamir;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_quote(rng: &mut ChaCha12Rng, hla: usize) -> MedicalQuote {
        let mut donor_bloodtype = [0u8; 4];
        donor_bloodtype[rng.gen_range(0..4)] = 1;
        MedicalQuote {
            donor_bloodtype,
            donor_antigens: (0..hla).map(|_| rng.gen_range(0..2)).collect(),
            patient_accepts: std::array::from_fn(|_| rng.gen_range(0..2)),
            patient_antibodies: (0..hla).map(|_| rng.gen_range(0..2) & rng.gen_range(0..2)).collect(),
        }
    }

    #[test]
    fn adjacency_matches_plaintext_rule() {
        let mut rng = ChaCha12Rng::seed_from_u64(3000);
        let quotes: Vec<MedicalQuote> = (0..5).map(|_| random_quote(&mut rng, 8)).collect();
        let expect = plain_adjacency(&quotes);
        let cfg = SessionConfig::default().with_seed(31).with_test_hooks();
        let shamir = Shamir::<F127>::new(3, 1).unwrap();
        let dealt = deal_quotes(&quotes, &shamir, &mut rng).unwrap();
        let out = run_session(&cfg, dealt, |ctx, qs| {
            let m = build_adjacency(ctx, &qs)?;
            let flat: Vec<_> = m.into_iter().flatten().collect();
            let vals = ctx.test_open_batch(&flat).map_err(crate::Error::Runtime)?;
            Ok(vals.iter().map(|v| v.to_i128().unwrap() as u8).collect::<Vec<_>>())
        })
        .unwrap();
        let n = quotes.len();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(out.outputs[0][i * n + j], expect[i][j], "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn universal_compatibility_gives_complete_digraph() {
        // identical O-donors whose patients accept O and carry no antibodies
        let q = MedicalQuote {
            donor_bloodtype: [1, 0, 0, 0],
            donor_antigens: vec![1, 0, 1, 0],
            patient_accepts: [1, 1, 1, 1],
            patient_antibodies: vec![0; 4],
        };
        let quotes = vec![q.clone(), q.clone(), q];
        let expect = plain_adjacency(&quotes);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(expect[i][j], u8::from(i != j));
            }
        }
    }
}

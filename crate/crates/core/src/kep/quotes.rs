//! Patient-donor pair inputs.
//!
//! Each pair contributes four 0/1 indicator vectors: the donor's bloodtype
//! (one-hot over O, A, B, AB) and HLA antigens, and the patient's accepted
//! donor bloodtypes and antibodies. Pairs secret-share these vectors among
//! the computing peers; the plaintext values exist only at the dealer (a
//! pair, or the test harness standing in for one).

use crate::field::PrimeField;
use crate::shamir::{Sh, Shamir};
use crate::{Error, Result};
use rand::RngCore;
use serde::{Deserialize, Serialize};

pub const BLOODTYPES: [&str; 4] = ["O", "A", "B", "AB"];

/// One pair's private medical data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MedicalQuote {
    /// One-hot donor bloodtype over `[O, A, B, AB]`.
    pub donor_bloodtype: [u8; 4],
    /// Donor HLA antigen indicators.
    pub donor_antigens: Vec<u8>,
    /// Donor bloodtypes the patient can accept.
    pub patient_accepts: [u8; 4],
    /// Patient antibody indicators, indexed like the antigen vector.
    pub patient_antibodies: Vec<u8>,
}

impl MedicalQuote {
    pub fn validate(&self) -> Result<()> {
        let binary = |v: &[u8]| v.iter().all(|&b| b <= 1);
        if !binary(&self.donor_bloodtype)
            || !binary(&self.donor_antigens)
            || !binary(&self.patient_accepts)
            || !binary(&self.patient_antibodies)
        {
            return Err(Error::InvalidInput("indicator vectors must be 0/1".into()));
        }
        if self.donor_bloodtype.iter().sum::<u8>() != 1 {
            return Err(Error::InvalidInput("donor bloodtype must be one-hot".into()));
        }
        if self.donor_antigens.len() != self.patient_antibodies.len() {
            return Err(Error::InvalidInput(
                "antigen and antibody vectors must have equal length".into(),
            ));
        }
        Ok(())
    }
}

/// The plaintext compatibility rule: some accepted bloodtype matches the
/// donor's, and no donor antigen meets a patient antibody.
pub fn compatible(donor: &MedicalQuote, patient: &MedicalQuote) -> bool {
    let blood = donor
        .donor_bloodtype
        .iter()
        .zip(&patient.patient_accepts)
        .any(|(&d, &p)| d == 1 && p == 1);
    let crossmatch = donor
        .donor_antigens
        .iter()
        .zip(&patient.patient_antibodies)
        .any(|(&a, &b)| a == 1 && b == 1);
    blood && !crossmatch
}

/// Plaintext compatibility graph (zero diagonal).
pub fn plain_adjacency(quotes: &[MedicalQuote]) -> Vec<Vec<u8>> {
    let n = quotes.len();
    let mut m = vec![vec![0u8; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j && compatible(&quotes[i], &quotes[j]) {
                m[i][j] = 1;
            }
        }
    }
    m
}

/// One peer's shares of a quote.
#[derive(Debug, Clone)]
pub struct QuoteShares<F> {
    pub donor_bloodtype: Vec<Sh<F>>,
    pub donor_antigens: Vec<Sh<F>>,
    pub patient_accepts: Vec<Sh<F>>,
    pub patient_antibodies: Vec<Sh<F>>,
}

/// Deal every quote to the peers: `result[peer][pair]`.
pub fn deal_quotes<F: PrimeField, R: RngCore + ?Sized>(
    quotes: &[MedicalQuote],
    shamir: &Shamir<F>,
    rng: &mut R,
) -> Result<Vec<Vec<QuoteShares<F>>>> {
    let kappa = shamir.kappa();
    let mut out: Vec<Vec<QuoteShares<F>>> = (0..kappa).map(|_| Vec::new()).collect();
    for q in quotes {
        q.validate()?;
        let mut dealt: Vec<QuoteShares<F>> = (0..kappa)
            .map(|_| QuoteShares {
                donor_bloodtype: Vec::new(),
                donor_antigens: Vec::new(),
                patient_accepts: Vec::new(),
                patient_antibodies: Vec::new(),
            })
            .collect();
        let mut deal = |bits: &[u8], pick: fn(&mut QuoteShares<F>) -> &mut Vec<Sh<F>>| {
            for &b in bits {
                let shares = shamir.share(F::from_u64(b as u64), rng);
                for (p, s) in shares.into_iter().enumerate() {
                    pick(&mut dealt[p]).push(Sh(s));
                }
            }
        };
        deal(&q.donor_bloodtype, |d| &mut d.donor_bloodtype);
        deal(&q.donor_antigens, |d| &mut d.donor_antigens);
        deal(&q.patient_accepts, |d| &mut d.patient_accepts);
        deal(&q.patient_antibodies, |d| &mut d.patient_antibodies);
        for (p, d) in dealt.into_iter().enumerate() {
            out[p].push(d);
        }
    }
    Ok(out)
}

/// Parse the line-oriented pool format: one pair per line,
/// `<id> <donor-bloodtype> <donor-antigens> <accepted-bloodtypes>
/// <patient-antibodies>`, each vector a 0/1 string; `#` starts a comment.
pub fn parse_quotes_text(text: &str) -> Result<Vec<MedicalQuote>> {
    let mut quotes = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::InvalidInput(format!(
                "line {}: expected 5 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let bits = |s: &str| -> Result<Vec<u8>> {
            s.chars()
                .map(|c| match c {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    _ => Err(Error::InvalidInput(format!(
                        "line {}: invalid bit character '{c}'",
                        lineno + 1
                    ))),
                })
                .collect()
        };
        let fixed4 = |s: &str| -> Result<[u8; 4]> {
            let v = bits(s)?;
            v.try_into().map_err(|_| {
                Error::InvalidInput(format!("line {}: bloodtype vectors have 4 bits", lineno + 1))
            })
        };
        let q = MedicalQuote {
            donor_bloodtype: fixed4(fields[1])?,
            donor_antigens: bits(fields[2])?,
            patient_accepts: fixed4(fields[3])?,
            patient_antibodies: bits(fields[4])?,
        };
        q.validate()?;
        quotes.push(q);
    }
    if quotes.is_empty() {
        return Err(Error::InvalidInput("no pairs in input".into()));
    }
    Ok(quotes)
}

/// Render quotes in the line-oriented pool format.
pub fn quotes_to_text(quotes: &[MedicalQuote]) -> String {
    let mut out = String::from(
        "# pair-id donor-bloodtype[OABAB] donor-antigens accepted-bloodtypes patient-antibodies\n",
    );
    for (i, q) in quotes.iter().enumerate() {
        let s = |v: &[u8]| v.iter().map(|b| char::from(b'0' + b)).collect::<String>();
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            i + 1,
            s(&q.donor_bloodtype),
            s(&q.donor_antigens),
            s(&q.patient_accepts),
            s(&q.patient_antibodies),
        ));
    }
    out
}

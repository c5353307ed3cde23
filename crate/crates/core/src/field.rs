//! Prime-field arithmetic.
//!
//! Every protocol value lives in `Z_p` for a prime `p` chosen large enough
//! that integer-pivoting tableau entries, comparison offsets and statistical
//! masks never wrap. Negative integers are encoded as `p - x`; decoding
//! treats residues below `p/2` as non-negative and the rest as negative.
//!
//! Three field backends are provided:
//!
//! * [`F127`] — the Mersenne prime `2^127 - 1`, fast `u128` arithmetic.
//!   Enough headroom for desk-scale pools (roughly 14 pairs or fewer).
//! * [`F256`] — the 256-bit prime `2^256 - 2^32 - 977`, the default for
//!   larger pools where fraction-free pivoting grows entries further.
//! * [`Fp<P>`] — a small const-modulus field used by exhaustive unit tests.

use rand::RngCore;

/// Operations every field backend must provide.
///
/// Canonical byte serialization is big-endian with fixed width
/// `ceil(bits(p) / 8)`; this is the wire encoding used by the transport.
pub trait PrimeField:
    Copy
    + Clone
    + PartialEq
    + Eq
    + std::fmt::Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// Short human-readable name ("p127", "p256", ...).
    const NAME: &'static str;

    /// Bit length of the modulus.
    fn modulus_bits() -> u32;

    /// Serialized width in bytes: `ceil(bits(p)/8)`.
    fn byte_len() -> usize {
        (Self::modulus_bits() as usize + 7) / 8
    }

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;

    fn from_u64(v: u64) -> Self;
    fn from_u128(v: u128) -> Self;

    /// Multiplicative inverse; `None` for zero.
    fn inv(self) -> Option<Self>;

    /// Canonical residue as little-endian 64-bit limbs (at most 4).
    fn to_limbs_le(self) -> [u64; 4];

    /// Build a field element from little-endian limbs, reducing mod p.
    fn from_limbs_le(limbs: [u64; 4]) -> Self;

    /// Uniformly random element.
    fn sample<R: RngCore + ?Sized>(rng: &mut R) -> Self;

    /// `2^k` as a field element (`k` may exceed 64).
    fn pow2(k: u32) -> Self {
        let mut acc = Self::one();
        let two = Self::from_u64(2);
        for _ in 0..k {
            acc = acc * two;
        }
        acc
    }

    /// Encode a signed integer (`-x` becomes `p - x`).
    fn from_i128(v: i128) -> Self {
        if v >= 0 {
            Self::from_u128(v as u128)
        } else {
            -Self::from_u128(v.unsigned_abs())
        }
    }

    /// Signed decode: residues `<= (p-1)/2` are non-negative, the rest map
    /// to `value - p`. `None` when the magnitude does not fit an `i128`.
    fn to_i128(self) -> Option<i128> {
        fn limbs_to_i128(l: [u64; 4]) -> Option<i128> {
            if l[2] != 0 || l[3] != 0 || l[1] >> 63 != 0 {
                return None;
            }
            Some(((l[1] as i128) << 64) | l[0] as i128)
        }
        let l = self.to_limbs_le();
        let half = Self::half_modulus_limbs();
        if le_limbs(&l, &half) {
            limbs_to_i128(l)
        } else {
            let p_minus = Self::from_limbs_le(l); // == self
            let neg = (-p_minus).to_limbs_le();
            limbs_to_i128(neg).map(|v| -v)
        }
    }

    /// `(p-1)/2` as little-endian limbs (used by signed decoding).
    fn half_modulus_limbs() -> [u64; 4];

    /// Append the canonical big-endian encoding to `out`.
    fn write_bytes(self, out: &mut Vec<u8>) {
        let limbs = self.to_limbs_le();
        let w = Self::byte_len();
        let mut bytes = vec![0u8; 32];
        for (i, limb) in limbs.iter().enumerate() {
            bytes[i * 8..(i + 1) * 8].copy_from_slice(&limb.to_le_bytes());
        }
        // big-endian, fixed width
        out.extend(bytes[..w].iter().rev());
    }

    /// Parse a canonical big-endian encoding; rejects wrong length and
    /// non-canonical (>= p) values.
    fn from_bytes(bytes: &[u8]) -> Option<Self> {
        if bytes.len() != Self::byte_len() {
            return None;
        }
        let mut le = vec![0u8; 32];
        for (i, b) in bytes.iter().rev().enumerate() {
            le[i] = *b;
        }
        let mut limbs = [0u64; 4];
        for (i, limb) in limbs.iter_mut().enumerate() {
            *limb = u64::from_le_bytes(le[i * 8..(i + 1) * 8].try_into().unwrap());
        }
        let v = Self::from_limbs_le(limbs);
        // canonical check: re-encoding must give back the same limbs
        if v.to_limbs_le() == limbs {
            Some(v)
        } else {
            None
        }
    }

    /// Low `bits` of the canonical residue (`bits <= 128`).
    fn low_u128(self, bits: u32) -> u128 {
        debug_assert!(bits <= 128);
        let l = self.to_limbs_le();
        let v = (l[1] as u128) << 64 | l[0] as u128;
        if bits == 128 {
            v
        } else {
            v & ((1u128 << bits) - 1)
        }
    }

    /// Bit `i` of the canonical residue.
    fn bit(self, i: u32) -> bool {
        let l = self.to_limbs_le();
        (l[(i / 64) as usize] >> (i % 64)) & 1 == 1
    }
}

/// `a <= b` on little-endian limb arrays.
fn le_limbs(a: &[u64; 4], b: &[u64; 4]) -> bool {
    for i in (0..4).rev() {
        if a[i] != b[i] {
            return a[i] < b[i];
        }
    }
    true
}

// ---------------------------------------------------------------------------
// F127: Mersenne prime 2^127 - 1
// ---------------------------------------------------------------------------

const P127: u128 = (1u128 << 127) - 1;
const MASK127: u128 = (1u128 << 127) - 1;

/// Field of the Mersenne prime `2^127 - 1`.
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct F127(u128);

impl std::fmt::Debug for F127 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "F127({})", self.0)
    }
}

impl F127 {
    fn reduce(v: u128) -> u128 {
        let mut x = (v & MASK127) + (v >> 127);
        if x >= P127 {
            x -= P127;
        }
        x
    }

    /// 256-bit product of two u128 values as (hi, lo).
    fn wide_mul(a: u128, b: u128) -> (u128, u128) {
        let (a0, a1) = (a as u64 as u128, a >> 64);
        let (b0, b1) = (b as u64 as u128, b >> 64);
        let p0 = a0 * b0;
        let p1 = a0 * b1;
        let p2 = a1 * b0;
        let p3 = a1 * b1;
        let mid = p1.wrapping_add(p2);
        let mid_carry = (mid < p1) as u128; // overflow of p1 + p2
        let lo = p0.wrapping_add(mid << 64);
        let lo_carry = (lo < p0) as u128;
        let hi = p3 + (mid >> 64) + (mid_carry << 64) + lo_carry;
        (hi, lo)
    }
}

impl std::ops::Add for F127 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut s = self.0 + o.0;
        if s >= P127 {
            s -= P127;
        }
        F127(s)
    }
}

impl std::ops::Sub for F127 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let s = self.0 + (P127 - o.0);
        let mut s = s;
        if s >= P127 {
            s -= P127;
        }
        F127(s)
    }
}

impl std::ops::Neg for F127 {
    type Output = Self;
    fn neg(self) -> Self {
        if self.0 == 0 {
            self
        } else {
            F127(P127 - self.0)
        }
    }
}

impl std::ops::Mul for F127 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (hi, lo) = Self::wide_mul(self.0, o.0);
        // hi*2^128 + lo  ==  hi*2 + lo  (mod 2^127 - 1)
        let folded = (lo & MASK127) + ((hi << 1) | (lo >> 127));
        F127(Self::reduce(folded))
    }
}

impl PrimeField for F127 {
    const NAME: &'static str = "p127";

    fn modulus_bits() -> u32 {
        127
    }

    fn zero() -> Self {
        F127(0)
    }

    fn one() -> Self {
        F127(1)
    }

    fn is_zero(&self) -> bool {
        self.0 == 0
    }

    fn from_u64(v: u64) -> Self {
        F127(v as u128)
    }

    fn from_u128(v: u128) -> Self {
        F127(Self::reduce(v))
    }

    fn inv(self) -> Option<Self> {
        if self.0 == 0 {
            return None;
        }
        // Fermat: x^(p-2)
        let e = P127 - 2;
        let mut acc = F127(1);
        let mut base = self;
        for i in 0..127 {
            if (e >> i) & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
        }
        Some(acc)
    }

    fn to_limbs_le(self) -> [u64; 4] {
        [self.0 as u64, (self.0 >> 64) as u64, 0, 0]
    }

    fn from_limbs_le(l: [u64; 4]) -> Self {
        debug_assert!(l[2] == 0 && l[3] == 0);
        Self::from_u128((l[1] as u128) << 64 | l[0] as u128)
    }

    fn half_modulus_limbs() -> [u64; 4] {
        let h = (P127 - 1) / 2;
        [h as u64, (h >> 64) as u64, 0, 0]
    }

    fn sample<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut buf = [0u8; 16];
            rng.fill_bytes(&mut buf);
            let v = u128::from_le_bytes(buf) & MASK127;
            if v < P127 {
                return F127(v);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// F256: 2^256 - 2^32 - 977
// ---------------------------------------------------------------------------

/// secp256k1 base-field modulus, little-endian limbs.
const P256: [u64; 4] = [
    0xFFFF_FFFE_FFFF_FC2F,
    0xFFFF_FFFF_FFFF_FFFF,
    0xFFFF_FFFF_FFFF_FFFF,
    0xFFFF_FFFF_FFFF_FFFF,
];
/// 2^256 mod p = 2^32 + 977
const C256: u64 = (1 << 32) + 977;

/// 256-bit prime field (`2^256 - 2^32 - 977`).
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct F256([u64; 4]);

impl std::fmt::Debug for F256 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "F256({:016x}{:016x}{:016x}{:016x})",
            self.0[3], self.0[2], self.0[1], self.0[0]
        )
    }
}

fn adc(a: u64, b: u64, carry: &mut u64) -> u64 {
    let t = a as u128 + b as u128 + *carry as u128;
    *carry = (t >> 64) as u64;
    t as u64
}

fn sbb(a: u64, b: u64, borrow: &mut u64) -> u64 {
    let t = (a as u128).wrapping_sub(b as u128 + *borrow as u128);
    *borrow = ((t >> 64) as u64).wrapping_neg() & 1;
    t as u64
}

fn geq4(a: &[u64; 4], b: &[u64; 4]) -> bool {
    for i in (0..4).rev() {
        if a[i] != b[i] {
            return a[i] > b[i];
        }
    }
    true
}

fn sub4(a: &[u64; 4], b: &[u64; 4]) -> [u64; 4] {
    let mut borrow = 0;
    let mut r = [0u64; 4];
    for i in 0..4 {
        r[i] = sbb(a[i], b[i], &mut borrow);
    }
    r
}

impl F256 {
    fn reduce_once(l: [u64; 4], top: u64) -> ([u64; 4], u64) {
        // l + top * (2^32 + 977)
        let mut r = [0u64; 4];
        let add = (top as u128) * C256 as u128;
        let mut carry = 0u64;
        r[0] = adc(l[0], add as u64, &mut carry);
        r[1] = adc(l[1], (add >> 64) as u64, &mut carry);
        r[2] = adc(l[2], 0, &mut carry);
        r[3] = adc(l[3], 0, &mut carry);
        (r, carry)
    }

    fn normalize(mut l: [u64; 4], mut top: u64) -> [u64; 4] {
        while top != 0 {
            let (r, c) = Self::reduce_once(l, top);
            l = r;
            top = c;
        }
        while geq4(&l, &P256) {
            l = sub4(&l, &P256);
        }
        l
    }
}

impl std::ops::Add for F256 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut carry = 0u64;
        let mut r = [0u64; 4];
        for i in 0..4 {
            r[i] = adc(self.0[i], o.0[i], &mut carry);
        }
        F256(Self::normalize(r, carry))
    }
}

impl std::ops::Sub for F256 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut borrow = 0u64;
        let mut r = [0u64; 4];
        for i in 0..4 {
            r[i] = sbb(self.0[i], o.0[i], &mut borrow);
        }
        if borrow != 0 {
            let mut carry = 0u64;
            for i in 0..4 {
                r[i] = adc(r[i], P256[i], &mut carry);
            }
        }
        F256(r)
    }
}

impl std::ops::Neg for F256 {
    type Output = Self;
    fn neg(self) -> Self {
        if self.is_zero() {
            self
        } else {
            F256(sub4(&P256, &self.0))
        }
    }
}

impl std::ops::Mul for F256 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        // schoolbook 4x4 -> 8 limbs
        let mut w = [0u64; 8];
        for i in 0..4 {
            let mut carry = 0u128;
            for j in 0..4 {
                let t = self.0[i] as u128 * o.0[j] as u128 + w[i + j] as u128 + carry;
                w[i + j] = t as u64;
                carry = t >> 64;
            }
            w[i + 4] = carry as u64;
        }
        // fold hi*2^256 = hi*(2^32 + 977)
        let lo = [w[0], w[1], w[2], w[3]];
        let hi = [w[4], w[5], w[6], w[7]];
        // hi * C256 -> 5 limbs
        let mut prod = [0u64; 5];
        let mut carry = 0u128;
        for i in 0..4 {
            let t = hi[i] as u128 * C256 as u128 + carry;
            prod[i] = t as u64;
            carry = t >> 64;
        }
        prod[4] = carry as u64;
        let mut r = [0u64; 4];
        let mut c = 0u64;
        for i in 0..4 {
            r[i] = adc(lo[i], prod[i], &mut c);
        }
        let top = prod[4] + c; // cannot overflow: prod[4] < 2^33
        F256(Self::normalize(r, top))
    }
}

impl PrimeField for F256 {
    const NAME: &'static str = "p256";

    fn modulus_bits() -> u32 {
        256
    }

    fn zero() -> Self {
        F256([0; 4])
    }

    fn one() -> Self {
        F256([1, 0, 0, 0])
    }

    fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    fn from_u64(v: u64) -> Self {
        F256([v, 0, 0, 0])
    }

    fn from_u128(v: u128) -> Self {
        F256([v as u64, (v >> 64) as u64, 0, 0])
    }

    fn inv(self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let mut e = P256;
        // p - 2
        e[0] -= 2;
        let mut acc = Self::one();
        let mut base = self;
        for limb in e {
            let mut bits = limb;
            let mut b = base;
            for _ in 0..64 {
                if bits & 1 == 1 {
                    acc = acc * b;
                }
                b = b * b;
                bits >>= 1;
            }
            base = b;
        }
        Some(acc)
    }

    fn to_limbs_le(self) -> [u64; 4] {
        self.0
    }

    fn from_limbs_le(l: [u64; 4]) -> Self {
        F256(Self::normalize(l, 0))
    }

    fn half_modulus_limbs() -> [u64; 4] {
        // (p-1)/2
        let mut l = P256;
        l[0] -= 1;
        let mut r = [0u64; 4];
        let mut rem = 0u64;
        for i in (0..4).rev() {
            let cur = (rem as u128) << 64 | l[i] as u128;
            r[i] = (cur / 2) as u64;
            rem = (cur % 2) as u64;
        }
        r
    }

    fn sample<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut buf = [0u8; 32];
            rng.fill_bytes(&mut buf);
            let mut l = [0u64; 4];
            for i in 0..4 {
                l[i] = u64::from_le_bytes(buf[i * 8..(i + 1) * 8].try_into().unwrap());
            }
            if !geq4(&l, &P256) {
                return F256(l);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Fp<P>: small const-modulus fields for exhaustive tests
// ---------------------------------------------------------------------------

/// Small prime field with a compile-time modulus (tests only; `P` must be an
/// odd prime below 2^32 so products fit comfortably).
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct Fp<const P: u64>(u64);

impl<const P: u64> std::fmt::Debug for Fp<P> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Fp<{}>({})", P, self.0)
    }
}

impl<const P: u64> std::ops::Add for Fp<P> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Fp((self.0 + o.0) % P)
    }
}

impl<const P: u64> std::ops::Sub for Fp<P> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Fp((self.0 + P - o.0) % P)
    }
}

impl<const P: u64> std::ops::Mul for Fp<P> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Fp(((self.0 as u128 * o.0 as u128) % P as u128) as u64)
    }
}

impl<const P: u64> std::ops::Neg for Fp<P> {
    type Output = Self;
    fn neg(self) -> Self {
        Fp((P - self.0) % P)
    }
}

impl<const P: u64> PrimeField for Fp<P> {
    const NAME: &'static str = "fp-small";

    fn modulus_bits() -> u32 {
        64 - P.leading_zeros()
    }

    fn zero() -> Self {
        Fp(0)
    }

    fn one() -> Self {
        Fp(1 % P)
    }

    fn is_zero(&self) -> bool {
        self.0 == 0
    }

    fn from_u64(v: u64) -> Self {
        Fp(v % P)
    }

    fn from_u128(v: u128) -> Self {
        Fp((v % P as u128) as u64)
    }

    fn inv(self) -> Option<Self> {
        if self.0 == 0 {
            return None;
        }
        let mut acc = Self::one();
        let mut base = self;
        let mut e = P - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        Some(acc)
    }

    fn to_limbs_le(self) -> [u64; 4] {
        [self.0, 0, 0, 0]
    }

    fn from_limbs_le(l: [u64; 4]) -> Self {
        let v = ((l[1] as u128) << 64 | l[0] as u128) % P as u128;
        debug_assert!(l[2] == 0 && l[3] == 0);
        Fp(v as u64)
    }

    fn half_modulus_limbs() -> [u64; 4] {
        [(P - 1) / 2, 0, 0, 0]
    }

    fn sample<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        Fp(rng.next_u64() % P)
    }
}

//! The Dirichlet character group modulo `q`.
//!
//! The unit group `(Z/qZ)^*` is split by CRT into prime-power pieces. Odd
//! prime powers are cyclic with their least primitive root as generator; the
//! 2-part is `{1}` for `2`, cyclic of order 2 (generator `-1`) for `4`, and
//! `<-1> x <5>` of orders `2` and `2^{e-2}` for `2^e`, `e >= 3`.
//!
//! A character is an exponent vector over these cyclic factors. Values are
//! kept as exact residues `k mod λ` (λ the group exponent), i.e. the value is
//! `e(k/λ)`; only [`DirichletCharacter::eval`] touches floating point.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{self, gcd, lcm, pow_mod};

/// One cyclic factor of the unit group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CyclicFactor {
    /// The prime `p` whose local group this factor belongs to.
    pub prime: u64,
    /// The prime power `p^e` it lives in.
    pub prime_power: u64,
    /// Generator as a residue modulo `prime_power`.
    pub generator: u64,
    /// Multiplicative order of the generator.
    pub order: u64,
}

/// A modulus together with the structure of its unit group and a discrete
/// logarithm table over the CRT generators.
#[derive(Clone)]
pub struct Modulus {
    q: u64,
    factorization: Vec<(u64, u32)>,
    factors: Vec<CyclicFactor>,
    phi: u64,
    exponent: u64,
    // Row-major `q x factors.len()`; `u32::MAX` marks non-units.
    log_table: Vec<u32>,
    roots: Vec<Complex64>,
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Modulus")
            .field("q", &self.q)
            .field("factorization", &self.factorization)
            .field("factors", &self.factors)
            .field("phi", &self.phi)
            .finish()
    }
}

const NOT_A_UNIT: u32 = u32::MAX;

impl Modulus {
    /// Builds the unit-group structure of `(Z/qZ)^*`. `q = 0` is treated as 1.
    pub fn new(q: u64) -> Self {
        let q = q.max(1);
        let factorization = arith::factorize(q);
        let mut factors = Vec::new();
        for &(p, e) in &factorization {
            let pe = p.pow(e);
            if p == 2 {
                match e {
                    1 => {}
                    2 => factors.push(CyclicFactor { prime: 2, prime_power: 4, generator: 3, order: 2 }),
                    _ => {
                        factors.push(CyclicFactor { prime: 2, prime_power: pe, generator: pe - 1, order: 2 });
                        factors.push(CyclicFactor {
                            prime: 2,
                            prime_power: pe,
                            generator: 5,
                            order: pe >> 2,
                        });
                    }
                }
            } else {
                let g = arith::least_primitive_root(p, e);
                factors.push(CyclicFactor { prime: p, prime_power: pe, generator: g, order: pe / p * (p - 1) });
            }
        }
        let phi = factorization.iter().map(|&(p, e)| p.pow(e - 1) * (p - 1)).product();
        let exponent = factors.iter().fold(1, |acc, f| lcm(acc, f.order));

        let nf = factors.len();
        let mut log_table = vec![NOT_A_UNIT; q as usize * nf.max(1)];
        // Local discrete logs, one table per prime power.
        let mut local: Vec<(u64, Vec<Option<Vec<u32>>>)> = Vec::new();
        for &(p, e) in &factorization {
            let pe = p.pow(e);
            let mut table: Vec<Option<Vec<u32>>> = vec![None; pe as usize];
            if p == 2 {
                match e {
                    1 => table[1] = Some(vec![]),
                    2 => {
                        table[1] = Some(vec![0]);
                        table[3] = Some(vec![1]);
                    }
                    _ => {
                        let mut x = 1u64;
                        for b in 0..(pe >> 2) {
                            table[x as usize] = Some(vec![0, b as u32]);
                            table[(pe - x) as usize] = Some(vec![1, b as u32]);
                            x = x * 5 % pe;
                        }
                    }
                }
            } else {
                let g = arith::least_primitive_root(p, e);
                let ord = pe / p * (p - 1);
                let mut x = 1u64;
                for k in 0..ord {
                    table[x as usize] = Some(vec![k as u32]);
                    x = x * g % pe;
                }
            }
            local.push((pe, table));
        }
        if nf > 0 {
            for r in 0..q {
                let mut row = Vec::with_capacity(nf);
                let mut unit = true;
                for (pe, table) in &local {
                    match &table[(r % pe) as usize] {
                        Some(logs) => row.extend_from_slice(logs),
                        None => {
                            unit = false;
                            break;
                        }
                    }
                }
                if unit {
                    log_table[r as usize * nf..(r as usize + 1) * nf].copy_from_slice(&row);
                }
            }
        }
        let roots = (0..exponent)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / exponent as f64))
            .collect();
        Modulus { q, factorization, factors, phi, exponent, log_table, roots }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    pub fn factorization(&self) -> &[(u64, u32)] {
        &self.factorization
    }

    pub fn factors(&self) -> &[CyclicFactor] {
        &self.factors
    }

    /// Exponent λ of the unit group (lcm of the factor orders).
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Discrete logs of `n` over the generators, or `None` if `gcd(n, q) > 1`.
    pub fn logs(&self, n: i64) -> Option<&[u32]> {
        let nf = self.factors.len();
        let r = n.rem_euclid(self.q as i64) as usize;
        if nf == 0 {
            return if gcd(r as u64, self.q) == 1 { Some(&[]) } else { None };
        }
        let row = &self.log_table[r * nf..(r + 1) * nf];
        if row[0] == NOT_A_UNIT {
            None
        } else {
            Some(row)
        }
    }

    /// `e(k/λ)` from the precomputed table.
    pub fn root_of_unity(&self, k: u64) -> Complex64 {
        self.roots[(k % self.exponent) as usize]
    }

    /// The CRT lift of each generator to a residue modulo `q`.
    pub fn lifted_generators(&self) -> Vec<u64> {
        self.factors
            .iter()
            .map(|f| {
                let other = self.q / f.prime_power;
                // x ≡ g (mod p^e), x ≡ 1 (mod q/p^e)
                if other == 1 {
                    f.generator % self.q
                } else {
                    let inv = arith::inv_mod(other % f.prime_power, f.prime_power).unwrap_or(0);
                    let inv2 = arith::inv_mod(f.prime_power % other, other).unwrap_or(0);
                    let a = arith::mul_mod(arith::mul_mod(f.generator, other, self.q), inv, self.q);
                    let b = arith::mul_mod(f.prime_power, inv2, self.q);
                    (a + b) % self.q
                }
            })
            .collect()
    }
}

/// Parity class of a character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn kappa(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even" | "+" => Ok(Parity::Even),
            "odd" | "-" => Ok(Parity::Odd),
            other => Err(format!("unknown parity `{other}` (expected even|odd)")),
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

#[derive(Clone)]
pub struct DirichletCharacter {
    modulus: Arc<Modulus>,
    index: usize,
    exponents: Vec<u64>,
    // exponent e_i scaled to λ: e_i * λ / ord_i
    weights: Vec<u64>,
    kappa: u8,
    conductor: u64,
}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirichletCharacter")
            .field("q", &self.modulus.q)
            .field("index", &self.index)
            .field("exponents", &self.exponents)
            .field("kappa", &self.kappa)
            .field("conductor", &self.conductor)
            .finish()
    }
}

impl DirichletCharacter {
    /// Builds the character with the given exponent vector (reduced modulo the
    /// factor orders). The index is the mixed-radix position of the vector.
    pub fn from_exponents(modulus: Arc<Modulus>, exponents: &[u64]) -> Self {
        assert_eq!(exponents.len(), modulus.factors.len(), "one exponent per cyclic factor");
        let exponents: Vec<u64> =
            exponents.iter().zip(&modulus.factors).map(|(&e, f)| e % f.order).collect();
        let lambda = modulus.exponent;
        let weights = exponents
            .iter()
            .zip(&modulus.factors)
            .map(|(&e, f)| e * (lambda / f.order))
            .collect();
        let mut index = 0usize;
        for (e, f) in exponents.iter().zip(&modulus.factors).rev() {
            index = index * f.order as usize + *e as usize;
        }
        let mut chi = DirichletCharacter { modulus, index, exponents, weights, kappa: 0, conductor: 1 };
        chi.kappa = match chi.value_index(-1) {
            Some(0) => 0,
            _ => 1,
        };
        chi.conductor = chi.brute_force_conductor();
        chi
    }

    pub fn modulus(&self) -> &Arc<Modulus> {
        &self.modulus
    }

    pub fn q(&self) -> u64 {
        self.modulus.q
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn kappa(&self) -> u8 {
        self.kappa
    }

    pub fn parity(&self) -> Parity {
        if self.kappa == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus.q
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// True when all values are real (order dividing 2).
    pub fn is_real(&self) -> bool {
        self.order() <= 2
    }

    /// Order of the character in the dual group.
    pub fn order(&self) -> u64 {
        self.exponents
            .iter()
            .zip(&self.modulus.factors)
            .fold(1, |acc, (&e, f)| lcm(acc, f.order / gcd(e, f.order)))
    }

    /// χ(n) = e(k/λ): returns `k`, or `None` when `gcd(n, q) > 1`.
    pub fn value_index(&self, n: i64) -> Option<u64> {
        let lambda = self.modulus.exponent;
        self.modulus.logs(n).map(|logs| {
            logs.iter()
                .zip(&self.weights)
                .fold(0u64, |acc, (&l, &w)| (acc + (l as u64 % lambda) * w) % lambda)
        })
    }

    /// χ(n) as a complex number (zero off the units).
    pub fn eval(&self, n: i64) -> Complex64 {
        match self.value_index(n) {
            Some(k) => self.modulus.root_of_unity(k),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Values χ(0), χ(1), …, χ(q-1).
    pub fn values(&self) -> Vec<Complex64> {
        (0..self.modulus.q as i64).map(|n| self.eval(n)).collect()
    }

    pub fn conjugate(&self) -> DirichletCharacter {
        let exps: Vec<u64> = self
            .exponents
            .iter()
            .zip(&self.modulus.factors)
            .map(|(&e, f)| (f.order - e) % f.order)
            .collect();
        let mut chi = self.clone();
        chi.weights = exps
            .iter()
            .zip(&self.modulus.factors)
            .map(|(&e, f)| e * (self.modulus.exponent / f.order))
            .collect();
        let mut index = 0usize;
        for (e, f) in exps.iter().zip(&self.modulus.factors).rev() {
            index = index * f.order as usize + *e as usize;
        }
        chi.index = index;
        chi.exponents = exps;
        chi
    }

    /// Whether χ is trivial on `{n ≡ 1 (mod d)} ∩ (Z/qZ)^*`, i.e. induced
    /// from a character modulo `d`.
    pub fn is_induced_from(&self, d: u64) -> bool {
        let q = self.modulus.q;
        if q % d != 0 {
            return false;
        }
        let mut n = 1u64;
        while n < q.max(2) {
            if let Some(k) = self.value_index(n as i64) {
                if k != 0 {
                    return false;
                }
            }
            n += d;
        }
        true
    }

    fn brute_force_conductor(&self) -> u64 {
        arith::divisors(self.modulus.q)
            .into_iter()
            .find(|&d| self.is_induced_from(d))
            .unwrap_or(self.modulus.q)
    }

    /// Conductor and primitivity flag.
    pub fn conductor_and_primitivity(&self) -> (u64, bool) {
        (self.conductor, self.is_primitive())
    }

    /// τ(χ) = Σ_{n=1}^{q} χ(n) e(n/q).
    pub fn gauss_sum(&self) -> Complex64 {
        let q = self.modulus.q;
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 1..=q {
            if let Some(k) = self.value_index(n as i64) {
                let phase = 2.0 * PI * (n % q) as f64 / q as f64;
                acc += self.modulus.root_of_unity(k) * Complex64::from_polar(1.0, phase);
            }
        }
        acc
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus.q == other.modulus.q && self.exponents == other.exponents
    }
}

/// All `φ(q)` characters modulo `q`, in mixed-radix order of their exponent
/// vectors (index 0 is the principal character).
pub fn enumerate_characters(q: u64) -> Vec<DirichletCharacter> {
    characters_of(Arc::new(Modulus::new(q)))
}

pub fn characters_of(modulus: Arc<Modulus>) -> Vec<DirichletCharacter> {
    let orders: Vec<u64> = modulus.factors.iter().map(|f| f.order).collect();
    let total: u64 = orders.iter().product();
    let mut out = Vec::with_capacity(total as usize);
    let mut exps = vec![0u64; orders.len()];
    for _ in 0..total {
        out.push(DirichletCharacter::from_exponents(modulus.clone(), &exps));
        for (e, &ord) in exps.iter_mut().zip(&orders) {
            *e += 1;
            if *e < ord {
                break;
            }
            *e = 0;
        }
    }
    out
}

/// Primitive characters modulo `q`, optionally restricted to one parity.
pub fn primitive_characters(q: u64, parity: Option<Parity>) -> Vec<DirichletCharacter> {
    enumerate_characters(q)
        .into_iter()
        .filter(|chi| chi.is_primitive() && parity.map_or(true, |p| chi.parity() == p))
        .collect()
}

/// Σ_{d|q} μ(d) φ(q/d), the number of primitive characters modulo `q`.
pub fn primitive_count_formula(q: u64) -> i64 {
    arith::divisors(q)
        .into_iter()
        .map(|d| arith::mobius(d) * arith::totient(q / d) as i64)
        .sum()
}

/// Free-function form of [`DirichletCharacter::eval`].
pub fn eval_character(chi: &DirichletCharacter, n: i64) -> Complex64 {
    chi.eval(n)
}

pub fn gauss_sum(chi: &DirichletCharacter) -> Complex64 {
    chi.gauss_sum()
}

pub fn conductor_and_primitivity(chi: &DirichletCharacter) -> (u64, bool) {
    chi.conductor_and_primitivity()
}

/// Checks that each generator has its stated order in its local group.
pub fn generators_have_stated_orders(m: &Modulus) -> bool {
    m.factors.iter().all(|f| {
        pow_mod(f.generator, f.order, f.prime_power) == 1
            && (f.order == 1 || arith::mult_order(f.generator, f.prime_power) == f.order)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    // Brute-force oracle: χ mod q is induced mod d iff χ(n) = χ(m) whenever
    // n ≡ m (mod d), both units mod q.
    fn oracle_conductor(chi: &DirichletCharacter) -> u64 {
        let q = chi.q();
        let vals = chi.values();
        for d in arith::divisors(q) {
            let mut ok = true;
            'outer: for n in 0..q {
                for m in 0..q {
                    if n % d == m % d && vals[n as usize].norm() > 0.5 && vals[m as usize].norm() > 0.5 {
                        if !close(vals[n as usize], vals[m as usize], 1e-9) {
                            ok = false;
                            break 'outer;
                        }
                    }
                }
            }
            if ok {
                return d;
            }
        }
        q
    }

    #[test]
    fn q5_structure() {
        let chars = enumerate_characters(5);
        assert_eq!(chars.len(), 4);
        assert_eq!(chars.iter().filter(|c| c.kappa() == 0).count(), 2);
        assert_eq!(chars.iter().filter(|c| c.kappa() == 1).count(), 2);
        assert_eq!(chars.iter().filter(|c| c.is_primitive()).count(), 3);
        for chi in &chars {
            assert_eq!(chi.conductor(), oracle_conductor(chi));
        }
        // The odd characters are the order-4 pair.
        assert!(chars.iter().filter(|c| c.kappa() == 1).all(|c| c.order() == 4));
    }

    #[test]
    fn q1_trivial() {
        let chars = enumerate_characters(1);
        assert_eq!(chars.len(), 1);
        assert_eq!(chars[0].kappa(), 0);
        assert!(close(chars[0].eval(17), Complex64::new(1.0, 0.0), 1e-15));
        assert!(close(chars[0].gauss_sum(), Complex64::new(1.0, 0.0), 1e-15));
    }

    #[test]
    fn q8_two_primitive() {
        let chars = enumerate_characters(8);
        assert_eq!(chars.len(), 4);
        assert_eq!(chars.iter().filter(|c| c.is_primitive()).count(), 2);
        for chi in &chars {
            assert_eq!(chi.conductor(), oracle_conductor(chi));
        }
        // The character mod 8 induced from the nontrivial character mod 4.
        let induced: Vec<_> = chars
            .iter()
            .filter(|c| (1..8).all(|n: i64| close(c.eval(n), if n % 2 == 0 { 0.0.into() } else if n % 4 == 1 { 1.0.into() } else { (-1.0).into() }, 1e-12)))
            .collect();
        assert_eq!(induced.len(), 1);
        assert_eq!(induced[0].conductor_and_primitivity(), (4, false));
    }

    #[test]
    fn quadratic_mod_5() {
        let squares: Vec<u64> = (1..5).map(|x| x * x % 5).collect();
        assert!(!squares.contains(&2));
        let chi = enumerate_characters(5).into_iter().find(|c| c.order() == 2).unwrap();
        assert!(close(chi.eval(2), Complex64::new(-1.0, 0.0), 1e-15));
        assert!(close(chi.eval(10), Complex64::new(0.0, 0.0), 0.0 + 1e-300));
        assert_eq!(chi.conductor_and_primitivity(), (5, true));
        // direct five-term Gauss sum
        let direct: Complex64 = (1..=5)
            .map(|n| {
                let leg = if n % 5 == 0 { 0.0 } else if squares.contains(&(n % 5)) { 1.0 } else { -1.0 };
                leg * Complex64::from_polar(1.0, 2.0 * PI * n as f64 / 5.0)
            })
            .sum();
        assert!(close(chi.gauss_sum(), direct, 1e-12));
        assert!(close(chi.gauss_sum(), Complex64::new(5f64.sqrt(), 0.0), 1e-12));
    }

    #[test]
    fn gauss_sum_mod_4() {
        let chi = enumerate_characters(4).into_iter().find(|c| !c.is_principal()).unwrap();
        let direct = Complex64::new(0.0, 1.0) - Complex64::new(0.0, -1.0);
        assert!(close(chi.gauss_sum(), direct, 1e-12));
        assert!(close(chi.gauss_sum(), Complex64::new(0.0, 2.0), 1e-12));
    }

    #[test]
    fn principal_has_conductor_one() {
        let chi = &enumerate_characters(5)[0];
        assert!(chi.is_principal());
        assert_eq!(chi.conductor_and_primitivity(), (1, false));
        for n in [1, 2, 3, 4, 6, -1] {
            assert!(close(chi.eval(n), Complex64::new(1.0, 0.0), 1e-15));
        }
    }

    #[test]
    fn generator_orders_and_lifts() {
        for q in 1..=300 {
            let m = Modulus::new(q);
            assert!(generators_have_stated_orders(&m), "q={q}");
            let prod: u64 = m.factorization().iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(prod, q);
            assert_eq!(m.phi(), arith::totient(q));
            for (g, f) in m.lifted_generators().iter().zip(m.factors()) {
                assert_eq!(g % f.prime_power, f.generator % f.prime_power);
            }
        }
    }

    #[test]
    fn conductor_matches_oracle_small_q() {
        for q in [9, 12, 16, 20, 24, 27] {
            for chi in enumerate_characters(q) {
                assert_eq!(chi.conductor(), oracle_conductor(&chi), "q={q} chi={:?}", chi.exponents());
            }
        }
    }

    #[test]
    fn conjugate_values() {
        for chi in enumerate_characters(21) {
            let bar = chi.conjugate();
            for n in 0..21 {
                assert!(close(bar.eval(n), chi.eval(n).conj(), 1e-12));
            }
            assert_eq!(bar.kappa(), chi.kappa());
            assert_eq!(bar.conductor(), chi.conductor());
        }
    }

    #[test]
    fn distinct_and_indexed() {
        let chars = enumerate_characters(36);
        for (i, chi) in chars.iter().enumerate() {
            assert_eq!(chi.index(), i);
        }
        for i in 0..chars.len() {
            for j in (i + 1)..chars.len() {
                assert!((1..36).any(|n| !close(chars[i].eval(n), chars[j].eval(n), 1e-9)));
            }
        }
    }
}

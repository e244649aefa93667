//! Finitely presented `Lambda`-modules at finite level, quotient towers
//! `Y/J_n Y`, kernels of the norm maps `nu_{n,m}` and the capitulation
//! tower `A_n = X/J_n`.
//!
//! Kernels are computed `Z_p`-faithfully: the kernel of
//! `nu_{n,m} : Y/J_n Y -> Y/J_m Y` is first computed modulo a high power
//! `p^K` and then pushed into `Y/J_n Y (x) Z/p^N`. The same computation
//! at a second, lower `K` must agree, which is reported as `stable`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::group_ring::{GammaVector, GroupRing, GroupRingElement, TightSet};
use crate::linalg::{module_invariants, submodule_invariants, ColumnSpan, FiniteModulePresentation, Matrix, ModuleInvariants};
use crate::padic::{ipow, Zpn};

/// Default bound on the number of kernel elements enumerated when
/// counting compatible chains exhaustively.
pub const DEFAULT_CHAIN_CAP: u64 = 100_000;

/// A module `Lambda^g / (rows)`, each relation a row of `g` expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaPresentation {
    generators: usize,
    relations: Vec<Vec<Expr>>,
}

impl LambdaPresentation {
    pub fn new(generators: usize, relations: Vec<Vec<Expr>>) -> Result<Self> {
        if generators == 0 {
            return Err(Error::OutOfRange("a presentation needs at least one generator".into()));
        }
        if let Some(r) = relations.iter().find(|r| r.len() != generators) {
            return Err(Error::Mismatch(format!("relation of length {} for {generators} generators", r.len())));
        }
        Ok(LambdaPresentation { generators, relations })
    }

    pub fn free(generators: usize) -> Self {
        LambdaPresentation { generators: generators.max(1), relations: Vec::new() }
    }

    /// `Lambda / (f_1, .., f_k)`
    pub fn cyclic(relations: Vec<Expr>) -> Self {
        LambdaPresentation { generators: 1, relations: relations.into_iter().map(|f| vec![f]).collect() }
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    pub fn relations(&self) -> &[Vec<Expr>] {
        &self.relations
    }
}

impl fmt::Display for LambdaPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .relations
            .iter()
            .map(|r| r.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "pres({}; {})", self.generators, rows.join("; "))
    }
}

/// `Y (x) R_{m,N}` as a `Z/p^N`-module: vectors of length `g * p^{dm}`,
/// block `i` holding the coefficients of generator `i`.
#[derive(Clone, Debug)]
pub struct RealizedModule {
    ring: GroupRing,
    generators: usize,
    relations: Matrix,
}

fn realize_row(ring: &GroupRing, row: &[Expr]) -> Result<Vec<GroupRingElement>> {
    row.iter().map(|e| e.eval(ring)).collect()
}

impl RealizedModule {
    pub fn ring(&self) -> &GroupRing {
        &self.ring
    }

    pub fn generators(&self) -> usize {
        self.generators
    }

    /// Dimension of the ambient free `Z/p^N`-module.
    pub fn dim(&self) -> usize {
        self.generators * self.ring.size()
    }

    /// Row-reduced relation vectors.
    pub fn relations(&self) -> &Matrix {
        &self.relations
    }

    pub fn presentation(&self) -> FiniteModulePresentation {
        FiniteModulePresentation::new(self.dim(), self.relations.clone()).expect("consistent")
    }

    pub fn invariants(&self) -> ModuleInvariants {
        module_invariants(&self.presentation())
    }

    pub fn vector(&self, blocks: &[GroupRingElement]) -> Result<Vec<u64>> {
        if blocks.len() != self.generators {
            return Err(Error::Mismatch(format!("{} coordinates for {} generators", blocks.len(), self.generators)));
        }
        let mut v = Vec::with_capacity(self.dim());
        for b in blocks {
            if b.ring() != &self.ring {
                return Err(Error::Mismatch("coordinate in a different ring".into()));
            }
            v.extend_from_slice(b.coeffs());
        }
        Ok(v)
    }

    /// `a * v` for the diagonal action of `R_{m,N}`.
    pub fn act(&self, a: &GroupRingElement, v: &[u64]) -> Vec<u64> {
        let size = self.ring.size();
        let mut out = Vec::with_capacity(v.len());
        for block in v.chunks(size) {
            let b = self.ring.from_coeffs(block.to_vec()).expect("block length");
            out.extend_from_slice((a * &b).coeffs());
        }
        out
    }

    /// All translates `gamma * v`.
    pub fn translates(&self, v: &[u64]) -> Vec<Vec<u64>> {
        let size = self.ring.size();
        let blocks: Vec<GroupRingElement> =
            v.chunks(size).map(|b| self.ring.from_coeffs(b.to_vec()).expect("block length")).collect();
        (0..size).map(|h| blocks.iter().flat_map(|b| b.translate(h).coeffs().to_vec()).collect()).collect()
    }

    /// Matrix of `v -> a * v` on the ambient module.
    pub fn action_matrix(&self, a: &GroupRingElement) -> Matrix {
        let size = self.ring.size();
        let dim = self.dim();
        let mut m = Matrix::zeros(self.ring.zpn(), dim, dim);
        for h in 0..size {
            let col = a.translate(h);
            for i in 0..self.generators {
                for (k, &c) in col.coeffs().iter().enumerate() {
                    if c != 0 {
                        m.set(i * size + k, i * size + h, c);
                    }
                }
            }
        }
        m
    }

    /// Quotient by the `Lambda`-span of further vectors.
    pub fn quotient(&self, extra: &[Vec<u64>]) -> Result<RealizedModule> {
        let mut rows = self.relations.row_vectors();
        for v in extra {
            if v.len() != self.dim() {
                return Err(Error::Mismatch("vector length differs from module dimension".into()));
            }
            rows.extend(self.translates(v));
        }
        let relations = Matrix::from_rows(self.ring.zpn(), self.dim(), rows)?.row_reduced();
        Ok(RealizedModule { ring: self.ring, generators: self.generators, relations })
    }

    /// Whether `v` is zero in the module.
    pub fn is_zero(&self, v: &[u64]) -> bool {
        ColumnSpan::new(&self.relations.transpose()).contains(v)
    }

    /// The same module at a lower precision.
    pub fn reduce_prec(&self, prec: u32) -> Result<RealizedModule> {
        Ok(RealizedModule {
            ring: self.ring.with_prec(prec)?,
            generators: self.generators,
            relations: self.relations.reduce_prec(prec)?.row_reduced(),
        })
    }
}

/// `Y (x) R_{m,N}`: relations lifted entrywise and spread over all
/// group translates.
pub fn realize_module(pres: &LambdaPresentation, ring: &GroupRing) -> Result<RealizedModule> {
    let free = RealizedModule {
        ring: *ring,
        generators: pres.generators,
        relations: Matrix::zeros(ring.zpn(), 0, pres.generators * ring.size()),
    };
    let mut rows = Vec::with_capacity(pres.relations.len());
    for r in &pres.relations {
        rows.push(free.vector(&realize_row(ring, r)?)?);
    }
    free.quotient(&rows)
}

/// Pairs `(j, x_j)`: the inertia subgroup attached to `tau_j` acts
/// through `x_j`, an element of the module given by its coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct InertiaDatum {
    pub pairs: Vec<(usize, Vec<Expr>)>,
}

impl InertiaDatum {
    pub fn new(pairs: Vec<(usize, Vec<Expr>)>) -> Self {
        InertiaDatum { pairs }
    }

    pub fn validate(&self, taus: &TightSet, generators: usize) -> Result<()> {
        for (j, x) in &self.pairs {
            if *j >= taus.taus().len() {
                return Err(Error::OutOfRange(format!("tau index {} but only {} taus", j + 1, taus.taus().len())));
            }
            if x.len() != generators {
                return Err(Error::Mismatch(format!("offset with {} coordinates for {generators} generators", x.len())));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.pairs.iter().all(|(_, x)| x.iter().all(|e| *e == Expr::Int(0)))
    }
}

/// A rule `n -> J_n` of submodules, realized as `Lambda`-generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdealFamily {
    /// `I_n Y`
    Augmentation,
    /// `J_n Y` for a tight set
    Tight(TightSet),
    /// `I_n X + Lambda {nu_{tau_j,0,n} x_j}`
    Inertia { taus: TightSet, datum: InertiaDatum },
}

impl IdealFamily {
    pub fn label(&self) -> String {
        let taus = |t: &TightSet| t.taus().iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",");
        match self {
            IdealFamily::Augmentation => "I".into(),
            IdealFamily::Tight(t) => format!("J[{}]", taus(t)),
            IdealFamily::Inertia { taus: t, datum } => {
                let pairs: Vec<String> = datum
                    .pairs
                    .iter()
                    .map(|(j, x)| format!("{}={}", j + 1, x.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")))
                    .collect();
                format!("ram[{}; {}]", taus(t), pairs.join("; "))
            }
        }
    }

    pub fn validate(&self, ring: &GroupRing, generators: usize) -> Result<()> {
        match self {
            IdealFamily::Augmentation => Ok(()),
            IdealFamily::Tight(t) => t.validate(ring.p(), ring.rank(), ring.level()),
            IdealFamily::Inertia { taus, datum } => {
                taus.validate(ring.p(), ring.rank(), ring.level())?;
                datum.validate(taus, generators)
            }
        }
    }

    /// `Lambda`-generators of `J_n` inside the ambient `R^g`.
    pub fn generators(&self, n: u32, module: &RealizedModule) -> Result<Vec<Vec<u64>>> {
        let ring = module.ring();
        if n > ring.level() {
            return Err(Error::LevelTooLow { level: ring.level(), required: n as i64 });
        }
        let g = module.generators();
        let unit = |i: usize, a: &GroupRingElement| -> Vec<u64> {
            let mut v = vec![0u64; module.dim()];
            v[i * ring.size()..(i + 1) * ring.size()].copy_from_slice(a.coeffs());
            v
        };
        let augmentation = || -> Result<Vec<Vec<u64>>> {
            let mut out = Vec::new();
            for s in GammaVector::standard_basis(ring.rank()) {
                let w = ring.omega(&s, n as i64)?;
                out.extend((0..g).map(|i| unit(i, &w)));
            }
            Ok(out)
        };
        match self {
            IdealFamily::Augmentation => augmentation(),
            IdealFamily::Tight(taus) => {
                let mut out = Vec::new();
                for t in taus.taus() {
                    let nu = ring.nu(t, 0, n as i64)?;
                    out.extend((0..g).map(|i| unit(i, &nu)));
                }
                Ok(out)
            }
            IdealFamily::Inertia { taus, datum } => {
                let mut out = augmentation()?;
                for (j, x) in &datum.pairs {
                    let nu = ring.nu(&taus.taus()[*j], 0, n as i64)?;
                    let xv = module.vector(&realize_row(ring, x)?)?;
                    out.push(module.act(&nu, &xv));
                }
                Ok(out)
            }
        }
    }
}

/// Kernel of `nu_{n,m} : Y/J_n Y -> Y/J_m Y` pushed into `Y/J_n Y (x) Z/p^N`.
#[derive(Clone, Debug, Serialize)]
pub struct DdotKernel {
    pub n: u32,
    pub m: u32,
    pub invariants: ModuleInvariants,
    /// Generators in the ambient module at precision `N`.
    #[serde(skip)]
    pub generators: Vec<Vec<u64>>,
    pub stable: bool,
}

/// The high-precision realization shared by all kernel computations of
/// one tower: `Y (x) R_{L,K}` and the relations of every `Y/J_n Y`.
struct Engine {
    prec: u32,
    hi: u32,
    mid: u32,
    module: RealizedModule,
    spans: BTreeMap<u32, Matrix>,
    family_gens: BTreeMap<u32, Vec<Vec<u64>>>,
}

impl Engine {
    fn new(pres: &LambdaPresentation, family: &IdealFamily, ring: &GroupRing, top: u32) -> Result<Self> {
        if top > ring.level() {
            return Err(Error::LevelTooLow { level: ring.level(), required: top as i64 });
        }
        let p = ring.p();
        let prec = ring.prec();
        let hi = Zpn::max_prec(p);
        if prec + 2 > hi {
            return Err(Error::PrecisionTooLarge { p, prec });
        }
        let mid = prec + (hi - prec) / 2;
        let ring_hi = ring.with_prec(hi)?;
        family.validate(&ring_hi, pres.generators)?;
        let module = realize_module(pres, &ring_hi)?;
        let mut spans = BTreeMap::new();
        let mut family_gens = BTreeMap::new();
        for n in 0..=top {
            let gens = family.generators(n, &module)?;
            spans.insert(n, module.quotient(&gens)?.relations);
            family_gens.insert(n, gens);
        }
        Ok(Engine { prec, hi, mid, module, spans, family_gens })
    }

    fn dim(&self) -> usize {
        self.module.dim()
    }

    fn low(&self) -> Zpn {
        self.module.ring.zpn().with_prec(self.prec).expect("lower precision")
    }

    fn relations_low(&self, n: u32) -> Matrix {
        self.spans[&n].reduce_prec(self.prec).expect("lower precision").row_reduced()
    }

    /// `nu_{n,m'} J_n` inside `J_{m'}` for `n <= m' <= m`, over `Z/p^K` with
    /// `K` maximal. Returns the number of generator checks.
    fn check_compatibility(&self, n: u32, m: u32) -> Result<usize> {
        let ring = self.module.ring;
        let mut checks = 0;
        for mm in n..=m {
            let nu = ring.norm_element(n as i64, mm as i64)?;
            let span = ColumnSpan::new(&self.spans[&mm].transpose());
            for (k, g) in self.family_gens[&n].iter().enumerate() {
                checks += 1;
                if !span.contains(&self.module.act(&nu, g)) {
                    return Err(Error::Compatibility(format!(
                        "nu_{{{n},{mm}}} times generator #{k} of J_{n} is not in J_{mm}"
                    )));
                }
            }
        }
        Ok(checks)
    }

    /// Generators of `{x : nu_{n,m} x in J_m mod p^k}`, reduced mod `p^N`.
    fn kernel_at(&self, n: u32, m: u32, k: u32) -> Result<Vec<Vec<u64>>> {
        let nu = self.module.ring.norm_element(n as i64, m as i64)?;
        let a = self.module.action_matrix(&nu).reduce_prec(k)?;
        let s = self.spans[&m].reduce_prec(k)?.transpose();
        let low = self.low();
        let dim = self.dim();
        let gens: Vec<Vec<u64>> = a
            .hstack(&s)?
            .kernel()
            .into_iter()
            .map(|v| v[..dim].iter().map(|&x| low.reduce(x)).collect())
            .collect();
        Ok(Matrix::from_rows(low, dim, gens)?.row_reduced().row_vectors())
    }

    fn kernel(&self, n: u32, m: u32) -> Result<DdotKernel> {
        let rel = self.relations_low(n);
        let low = self.low();
        let generators = self.kernel_at(n, m, self.hi)?;
        let invariants = submodule_invariants(low, self.dim(), &generators, &rel)?;
        let coarse = submodule_invariants(low, self.dim(), &self.kernel_at(n, m, self.mid)?, &rel)?;
        // the finer kernel maps into the coarser one, so equal orders mean equal images
        let stable = coarse.order_exp() == invariants.order_exp();
        Ok(DdotKernel { n, m, invariants, generators, stable })
    }

    fn quotient_invariants(&self, n: u32) -> ModuleInvariants {
        module_invariants(&FiniteModulePresentation::new(self.dim(), self.relations_low(n)).expect("consistent"))
    }
}

/// `Y/J_n Y` at the level and precision of `ring`, after checking
/// `nu_{n,m} J_n in J_m` for every `m` from `n` to the level.
pub fn quotient_tower(pres: &LambdaPresentation, family: &IdealFamily, n: u32, ring: &GroupRing) -> Result<RealizedModule> {
    let engine = Engine::new(pres, family, ring, ring.level())?;
    engine.check_compatibility(n, ring.level())?;
    let module = realize_module(pres, ring)?;
    module.quotient(&family.generators(n, &module)?)
}

fn check_window(n: u32, m: u32) -> Result<()> {
    if m < n {
        return Err(Error::IndexOrder(format!("need m >= n, got n = {n}, m = {m}")));
    }
    Ok(())
}

/// `ker(nu_{n,m} : Y/J_n Y -> Y/J_m Y)`, computed at the level of `ring`
/// and reported at its precision.
pub fn ddot_kernel(pres: &LambdaPresentation, family: &IdealFamily, n: u32, m: u32, ring: &GroupRing) -> Result<DdotKernel> {
    check_window(n, m)?;
    let engine = Engine::new(pres, family, ring, m)?;
    engine.check_compatibility(n, m)?;
    engine.kernel(n, m)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GridEntry {
    pub n: u32,
    pub m: u32,
    pub order_exp: u64,
    pub p_rank: usize,
    pub exponents: Vec<u32>,
    pub stable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stabilization {
    pub n: u32,
    /// Kernel order exponents for `m = n, .., m_max`.
    pub orders: Vec<u64>,
    /// The last two orders agree (or only one `m` was computed).
    pub stabilized: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientEntry {
    pub n: u32,
    pub exponents: Vec<u32>,
    pub p_rank: usize,
    pub visible_rank: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChainMethod {
    Exhaustive,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainCount {
    /// Number of compatible chains, `None` if it does not fit.
    pub count: Option<u128>,
    /// `log_p` of the count.
    pub log_p: u64,
    pub method: ChainMethod,
    /// `log_p` of the count from the linear route.
    pub linear_log_p: u64,
    /// Count from exhaustive enumeration, when it ran.
    pub exhaustive: Option<u128>,
    /// Every generator of the kernel at `n+1` projects into the kernel at `n`.
    pub coherent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TowerReport {
    pub p: u64,
    pub d: usize,
    pub prec: u32,
    pub level: u32,
    pub family: String,
    pub n_max: u32,
    pub m_max: u32,
    pub grid: Vec<GridEntry>,
    pub stabilization: Vec<Stabilization>,
    pub quotients: Vec<QuotientEntry>,
    pub chains: ChainCount,
    pub compatibility_checks: usize,
    pub stable: bool,
}

impl TowerReport {
    pub fn max_order_exp(&self) -> u64 {
        self.grid.iter().map(|e| e.order_exp).max().unwrap_or(0)
    }

    pub fn entry(&self, n: u32, m: u32) -> Option<&GridEntry> {
        self.grid.iter().find(|e| e.n == n && e.m == m)
    }
}

fn pow_u128(p: u64, e: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc.checked_mul(p as u128)?;
    }
    Some(acc)
}

/// Elements of the subgroup of `A/S` generated by `gens`, keyed by a
/// canonical form, each with one representative.
fn enumerate_subgroup(low: Zpn, gens: &[Vec<u64>], span: &ColumnSpan, dim: usize) -> HashMap<Vec<u64>, Vec<u64>> {
    let zero = vec![0u64; dim];
    let mut seen = HashMap::new();
    seen.insert(span.canonical(&zero), zero.clone());
    let mut queue = vec![zero];
    while let Some(x) = queue.pop() {
        for g in gens {
            let y: Vec<u64> = x.iter().zip(g).map(|(&a, &b)| low.add(a, b)).collect();
            let key = span.canonical(&y);
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(key) {
                e.insert(y.clone());
                queue.push(y);
            }
        }
    }
    seen
}

fn count_chains(engine: &Engine, kernels: &[DdotKernel], cap: u64) -> Result<ChainCount> {
    let low = engine.low();
    let p = low.p();
    let dim = engine.dim();
    let top = kernels.len() - 1;
    let rels: Vec<Matrix> = (0..=top as u32).map(|n| engine.relations_low(n)).collect();

    // coherence: kernel at n+1 projects into kernel at n
    let mut coherent = true;
    for n in 0..top {
        let mut cols = kernels[n].generators.clone();
        cols.extend(rels[n].row_vectors());
        let span = ColumnSpan::new(&Matrix::from_columns(low, dim, &cols)?);
        coherent &= kernels[n + 1].generators.iter().all(|w| span.contains(w));
    }

    // linear route: |ker Phi| for Phi(y) = (y_n - y_{n+1})_n
    let total: u64 = kernels.iter().map(|k| k.invariants.order_exp()).sum();
    let image = if top == 0 {
        0
    } else {
        let big = dim * top;
        let mut gens = Vec::new();
        for (k, ker) in kernels.iter().enumerate() {
            for w in &ker.generators {
                let mut v = vec![0u64; big];
                if k < top {
                    v[k * dim..(k + 1) * dim].copy_from_slice(w);
                }
                if k >= 1 {
                    for (j, &x) in w.iter().enumerate() {
                        v[(k - 1) * dim + j] = low.neg(x);
                    }
                }
                gens.push(v);
            }
        }
        let mut rel_rows = Vec::new();
        for (n, r) in rels.iter().enumerate().take(top) {
            for row in r.row_vectors() {
                let mut v = vec![0u64; big];
                v[n * dim..(n + 1) * dim].copy_from_slice(&row);
                rel_rows.push(v);
            }
        }
        let rel = Matrix::from_rows(low, big, rel_rows)?;
        submodule_invariants(low, big, &gens, &rel)?.order_exp()
    };
    let linear_log_p = total - image;

    // exhaustive route, when small enough
    let sizes: Option<Vec<u128>> = kernels.iter().map(|k| pow_u128(p, k.invariants.order_exp())).collect();
    let work: Option<u128> = sizes.as_ref().map(|s| s.iter().sum());
    let exhaustive = match work {
        Some(w) if w <= cap as u128 => {
            let spans: Vec<ColumnSpan> = rels.iter().map(|r| ColumnSpan::new(&r.transpose())).collect();
            let elems: Vec<HashMap<Vec<u64>, Vec<u64>>> = kernels
                .iter()
                .zip(&spans)
                .map(|(k, s)| enumerate_subgroup(low, &k.generators, s, dim))
                .collect();
            let mut counts: HashMap<Vec<u64>, u128> = elems[0].keys().map(|k| (k.clone(), 1)).collect();
            for n in 1..=top {
                let mut next = HashMap::new();
                for (key, rep) in &elems[n] {
                    let below = spans[n - 1].canonical(rep);
                    next.insert(key.clone(), counts.get(&below).copied().unwrap_or(0));
                }
                counts = next;
            }
            Some(counts.values().sum::<u128>())
        }
        _ => None,
    };
    let (method, count, log_p) = match exhaustive {
        Some(c) => (ChainMethod::Exhaustive, Some(c), linear_log_p),
        None => (ChainMethod::Linear, pow_u128(p, linear_log_p), linear_log_p),
    };
    Ok(ChainCount { count, log_p, method, linear_log_p, exhaustive, coherent })
}

/// Kernels of `nu_{n,m}` on `Y/J_n Y` for `n <= n_max`, `n <= m <= m_max`,
/// with stabilization in `m` and the number of compatible chains
/// `(y_n)_{n <= n_max}`, `y_n` in the kernel for `m = m_max`.
pub fn ddot_profile(
    pres: &LambdaPresentation,
    family: &IdealFamily,
    n_max: u32,
    m_max: u32,
    ring: &GroupRing,
    chain_cap: u64,
) -> Result<TowerReport> {
    check_window(n_max, m_max)?;
    let engine = Engine::new(pres, family, ring, m_max)?;
    let mut compatibility_checks = 0;
    for n in 0..=n_max {
        compatibility_checks += engine.check_compatibility(n, m_max)?;
    }
    let cells: Vec<(u32, u32)> = (0..=n_max).flat_map(|n| (n..=m_max).map(move |m| (n, m))).collect();
    let kernels: Vec<DdotKernel> = cells.par_iter().map(|&(n, m)| engine.kernel(n, m)).collect::<Result<_>>()?;

    let grid: Vec<GridEntry> = kernels
        .iter()
        .map(|k| GridEntry {
            n: k.n,
            m: k.m,
            order_exp: k.invariants.order_exp(),
            p_rank: k.invariants.p_rank(),
            exponents: k.invariants.exponents.clone(),
            stable: k.stable,
        })
        .collect();
    let stabilization = (0..=n_max)
        .map(|n| {
            let orders: Vec<u64> = grid.iter().filter(|e| e.n == n).map(|e| e.order_exp).collect();
            let stabilized = orders.len() < 2 || orders[orders.len() - 1] == orders[orders.len() - 2];
            Stabilization { n, orders, stabilized }
        })
        .collect();
    let quotients = (0..=m_max)
        .map(|n| {
            let inv = engine.quotient_invariants(n);
            QuotientEntry { n, p_rank: inv.p_rank(), visible_rank: inv.visible_rank(), exponents: inv.exponents }
        })
        .collect();
    let tops: Vec<DdotKernel> = kernels.iter().filter(|k| k.m == m_max).cloned().collect();
    let chains = count_chains(&engine, &tops, chain_cap)?;
    Ok(TowerReport {
        p: ring.p(),
        d: ring.rank(),
        prec: ring.prec(),
        level: ring.level(),
        family: family.label(),
        n_max,
        m_max,
        stable: grid.iter().all(|e| e.stable),
        grid,
        stabilization,
        quotients,
        chains,
        compatibility_checks,
    })
}

/// The tower `A_n = X/J_n` with `J_n = I_n X + Lambda {nu_{tau_j,0,n} x_j}`
/// and the capitulation maps `nu_{n,m} : A_n -> A_m`.
pub fn capitulation_tower(
    x: &LambdaPresentation,
    taus: &TightSet,
    inertia: &InertiaDatum,
    n_max: u32,
    m_max: u32,
    ring: &GroupRing,
    chain_cap: u64,
) -> Result<TowerReport> {
    let family = IdealFamily::Inertia { taus: taus.clone(), datum: inertia.clone() };
    ddot_profile(x, &family, n_max, m_max, ring, chain_cap)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankEntry {
    pub n: u32,
    /// Number of `Z/p^N` factors of `Y/I_n Y (x) Z/p^N`.
    pub visible_rank: usize,
    /// The same count at precision `N + 1`.
    pub visible_rank_next: usize,
    pub stable: bool,
    /// `r_n / p^{dn}`
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankGrowth {
    pub entries: Vec<RankEntry>,
    /// `r_n / p^{dn}` at the largest `n`.
    pub leading: f64,
}

/// Visible ranks of `Y/I_n Y` for `n = 0, .., n_max`, each realized at
/// level `n` directly.
pub fn rank_growth(pres: &LambdaPresentation, p: u64, d: usize, n_max: u32, prec: u32) -> Result<RankGrowth> {
    let mut entries = Vec::new();
    for n in 0..=n_max {
        let ring = GroupRing::new(p, d, n, prec)?;
        let visible_rank = realize_module(pres, &ring)?.invariants().visible_rank();
        let visible_rank_next = realize_module(pres, &ring.with_prec(prec + 1)?)?.invariants().visible_rank();
        let ratio = visible_rank as f64 / ipow(p, d as u32 * n) as f64;
        entries.push(RankEntry { n, visible_rank, visible_rank_next, stable: visible_rank == visible_rank_next, ratio });
    }
    let leading = entries.last().map_or(0.0, |e| e.ratio);
    Ok(RankGrowth { entries, leading })
}

/// `sum_gamma gamma` over coset representatives `gamma = p^n a`,
/// `0 <= a_i < p^{m-n}`, of `Gamma^{(n)}/Gamma^{(m)}`, acting on the
/// ambient module at level `m`.
pub fn coset_translation_sum(module: &RealizedModule, n: u32) -> Result<Matrix> {
    let ring = module.ring();
    let m = ring.level();
    check_window(n, m)?;
    let f = ring.zpn();
    let dim = module.dim();
    let size = ring.size();
    let step = ipow(ring.p(), n);
    let count = ipow(ring.p(), m - n);
    let mut total = Matrix::zeros(f, dim, dim);
    let mut a = vec![0u64; ring.rank()];
    loop {
        let gamma = ring.index_of(&a.iter().map(|&x| x * step).collect::<Vec<_>>());
        for i in 0..module.generators() {
            for h in 0..size {
                let (r, c) = (i * size + ring.add_indices(h, gamma), i * size + h);
                total.set(r, c, f.add(total.get(r, c), 1));
            }
        }
        let mut k = 0;
        while k < a.len() {
            a[k] += 1;
            if a[k] < count {
                break;
            }
            a[k] = 0;
            k += 1;
        }
        if k == a.len() {
            break;
        }
    }
    Ok(total)
}

/// First `n <= n_max` with `y` outside `J_n Y`, computed in `Y (x) R_{m,N}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SeparationIndex {
    At(u32),
    AtLeast(u32),
}

pub fn separation_index(
    pres: &LambdaPresentation,
    y: &[Expr],
    taus: &TightSet,
    n_max: u32,
    ring: &GroupRing,
) -> Result<SeparationIndex> {
    if n_max > ring.level() {
        return Err(Error::LevelTooLow { level: ring.level(), required: n_max as i64 });
    }
    let module = realize_module(pres, ring)?;
    let family = IdealFamily::Tight(taus.clone());
    family.validate(ring, pres.generators)?;
    let v = module.vector(&realize_row(ring, y)?)?;
    for n in 0..=n_max {
        let q = module.quotient(&family.generators(n, &module)?)?;
        if !q.is_zero(&v) {
            return Ok(SeparationIndex::At(n));
        }
    }
    Ok(SeparationIndex::AtLeast(n_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn free_family_j(d: usize) -> IdealFamily {
        IdealFamily::Tight(TightSet::standard(d))
    }

    #[test]
    fn realize_free_and_quotients() {
        let ring = GroupRing::new(2, 2, 1, 3).unwrap();
        let free = realize_module(&LambdaPresentation::free(1), &ring).unwrap();
        assert_eq!(free.invariants().exponents, vec![3; 4]);
        // Lambda/(p): killed by p, p-rank p^{dm}
        let modp = realize_module(&LambdaPresentation::cyclic(vec![Expr::Int(2)]), &ring).unwrap();
        let inv = modp.invariants();
        assert_eq!((inv.p_rank(), inv.order_exp()), (4, 4));
        // Lambda/(T_1) at level 1 is Z_p[Gamma/<sigma_1>]
        let t1 = realize_module(&LambdaPresentation::cyclic(vec![Expr::Var(0)]), &ring).unwrap();
        assert_eq!(t1.invariants().exponents, vec![3, 3]);
    }

    #[test]
    fn quotient_tower_examples() {
        let ring = GroupRing::new(2, 1, 2, 3).unwrap();
        let lam = LambdaPresentation::free(1);
        // Lambda/J_0 = 0 since nu_{s,0,0} = 1
        let q0 = quotient_tower(&lam, &free_family_j(1), 0, &ring).unwrap();
        assert!(q0.invariants().is_trivial());
        // Lambda/J_1 = Z_p[s]/(1+s) is free of rank 1
        let q1 = quotient_tower(&lam, &free_family_j(1), 1, &ring).unwrap();
        assert_eq!(q1.invariants().exponents, vec![3]);
        // Lambda/I_1 is the group ring at level 1
        let i1 = quotient_tower(&lam, &IdealFamily::Augmentation, 1, &ring).unwrap();
        assert_eq!(i1.invariants().exponents, vec![3, 3]);
    }

    #[test]
    fn ddot_trivial_diagonal() {
        let ring = GroupRing::new(2, 1, 2, 3).unwrap();
        let k = ddot_kernel(&LambdaPresentation::free(1), &free_family_j(1), 1, 1, &ring).unwrap();
        assert!(k.invariants.is_trivial());
        assert!(k.stable);
    }

    #[test]
    fn ddot_matches_brute_force() {
        // d = 1, p = 2, (n, m) = (1, 2): kernel of nu_{1,2} on Lambda/J_1 -> Lambda/J_2
        let ring = GroupRing::new(2, 1, 2, 3).unwrap();
        let k = ddot_kernel(&LambdaPresentation::free(1), &free_family_j(1), 1, 2, &ring).unwrap();
        // Lambda/J_1 = Z_2 (s = -1), nu_{1,2} = 1 + s^2 acts as 2, and 2x in J_2 forces x in J_1
        assert!(k.invariants.is_trivial());
        assert!(k.stable);
    }

    #[test]
    fn norm_identity_small() {
        let ring = GroupRing::new(2, 2, 2, 3).unwrap();
        let module = realize_module(&LambdaPresentation::free(1), &ring).unwrap();
        for n in 0..=2 {
            let lhs = module.action_matrix(&ring.norm_element(n as i64, 2).unwrap());
            assert_eq!(lhs, coset_translation_sum(&module, n).unwrap());
        }
    }

    #[test]
    fn rank_growth_examples() {
        let free = rank_growth(&LambdaPresentation::free(2), 2, 2, 2, 3).unwrap();
        assert_eq!(free.entries.iter().map(|e| e.visible_rank).collect::<Vec<_>>(), vec![2, 8, 32]);
        assert_eq!(free.leading, 2.0);
        let tors = rank_growth(&LambdaPresentation::cyclic(vec![Expr::Var(0)]), 2, 2, 2, 3).unwrap();
        assert_eq!(tors.entries.iter().map(|e| e.visible_rank).collect::<Vec<_>>(), vec![1, 2, 4]);
    }

    #[test]
    fn separation_examples() {
        let ring = GroupRing::new(2, 1, 2, 3).unwrap();
        let lam = LambdaPresentation::free(1);
        let taus = TightSet::standard(1);
        assert_eq!(separation_index(&lam, &[Expr::Int(0)], &taus, 2, &ring).unwrap(), SeparationIndex::AtLeast(2));
        assert_eq!(separation_index(&lam, &[Expr::Int(1)], &taus, 2, &ring).unwrap(), SeparationIndex::At(1));
        // p^k for k < N still leaves J_1; p^N is zero at this precision
        let idx: Vec<_> =
            (0..=3).map(|k| separation_index(&lam, &[Expr::Int(1 << k)], &taus, 2, &ring).unwrap()).collect();
        assert_eq!(
            idx,
            vec![SeparationIndex::At(1), SeparationIndex::At(1), SeparationIndex::At(1), SeparationIndex::AtLeast(2)]
        );
    }

    #[test]
    fn capitulation_trivial_action() {
        let ring = GroupRing::new(2, 1, 3, 4).unwrap();
        let x = LambdaPresentation::cyclic(vec![Expr::Var(0)]);
        let datum = InertiaDatum::new(vec![(0, vec![Expr::Int(1)])]);
        let report = capitulation_tower(&x, &TightSet::standard(1), &datum, 3, 3, &ring, DEFAULT_CHAIN_CAP).unwrap();
        for q in &report.quotients {
            let expected: Vec<u32> = if q.n == 0 { vec![] } else { vec![q.n] };
            assert_eq!(q.exponents, expected);
        }
        assert!(report.grid.iter().all(|e| e.order_exp == 0));
    }
}

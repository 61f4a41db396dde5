//! Binary artifact files for offline/online decoupling.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "SMDM" | version u32 | model id (u64 length + UTF-8) | n u64 | N u64 | r u64 | dt f64
//! | r coordinate pairs (u64, u64) | states n x N | nonlinear n x N | values r x N
//! | tagged blocks ...
//! ```
//!
//! Value blocks are column-major `f64`. Each tagged block is a 4-byte tag, a
//! `u64` payload length and the payload; readers skip tags they do not know.
//! `N = r = 0` marks an artifact without snapshots.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::deim::DeimInterpolant;
use crate::error::{Error, Result};
use crate::jacobian_approx::{InterpolantMode, MatrixInterpolant};
use crate::linalg::DenseMatrix;
use crate::pod::PodBasis;
use crate::rom::{
    DeimTermPayload, HyperReductionPayload, JacobianPayload, ReducedStage, Strategy, TensorialPayload,
};
use crate::snapshots::{SnapshotSet, SparsityPattern, StageJacobians};

pub const MAGIC: &[u8; 4] = b"SMDM";
pub const VERSION: u32 = 1;

/// Offline reduced-model payload: everything `ReducedModel::from_parts` needs
/// besides the full model.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPayload {
    pub strategy: Strategy,
    pub basis: PodBasis,
    pub stages: Vec<ReducedStage>,
    pub offline_seconds: f64,
}

/// Contents of one artifact file.
#[derive(Debug, Clone, Default)]
pub struct Artifact {
    pub model_id: String,
    pub n: usize,
    pub dt: f64,
    pub snapshots: Option<SnapshotSet>,
    pub config_hash: Option<u64>,
    pub basis: Option<PodBasis>,
    pub function_interpolant: Option<DeimInterpolant>,
    pub matrix_interpolants: Vec<MatrixInterpolant>,
    pub reduced: Option<ReducedPayload>,
}

#[derive(Default)]
struct Enc(Vec<u8>);

impl Enc {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.usize(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
    fn usizes(&mut self, v: &[usize]) {
        self.usize(v.len());
        v.iter().for_each(|&x| self.usize(x));
    }
    fn f64s(&mut self, v: &[f64]) {
        self.usize(v.len());
        v.iter().for_each(|&x| self.f64(x));
    }
    fn raw_f64s(&mut self, v: &[f64]) {
        v.iter().for_each(|&x| self.f64(x));
    }
    fn coords(&mut self, c: &[(usize, usize)]) {
        self.usize(c.len());
        self.raw_coords(c);
    }
    fn raw_coords(&mut self, c: &[(usize, usize)]) {
        for &(a, b) in c {
            self.usize(a);
            self.usize(b);
        }
    }
    fn matrix(&mut self, m: &DenseMatrix) {
        self.usize(m.nrows());
        self.usize(m.ncols());
        self.raw_f64s(m.as_slice());
    }
    fn block(&mut self, tag: &[u8; 4], payload: Enc) {
        self.0.extend_from_slice(tag);
        self.usize(payload.0.len());
        self.0.extend_from_slice(&payload.0);
    }
}

struct Dec<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Dec<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len()).ok_or_else(|| {
            Error::Format(format!("truncated artifact: need {len} bytes at offset {}", self.pos))
        })?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| Error::Format(format!("size {v} does not fit this platform")))
    }
    /// A count of items that each occupy at least `item_bytes`, checked against the remaining input.
    fn count(&mut self, item_bytes: usize) -> Result<usize> {
        let c = self.usize()?;
        if c.saturating_mul(item_bytes) > self.buf.len() - self.pos {
            return Err(Error::Format(format!("count {c} exceeds remaining artifact size")));
        }
        Ok(c)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn str(&mut self) -> Result<String> {
        let len = self.count(1)?;
        String::from_utf8(self.take(len)?.to_vec()).map_err(|e| Error::Format(format!("model id: {e}")))
    }
    fn usizes(&mut self) -> Result<Vec<usize>> {
        let c = self.count(8)?;
        (0..c).map(|_| self.usize()).collect()
    }
    fn f64s(&mut self) -> Result<Vec<f64>> {
        let c = self.count(8)?;
        self.raw_f64s(c)
    }
    fn raw_f64s(&mut self, c: usize) -> Result<Vec<f64>> {
        let bytes = self.take(c.checked_mul(8).ok_or_else(|| Error::Format("block too large".into()))?)?;
        Ok(bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
    }
    fn coords(&mut self) -> Result<Vec<(usize, usize)>> {
        let c = self.count(16)?;
        self.raw_coords(c)
    }
    fn raw_coords(&mut self, c: usize) -> Result<Vec<(usize, usize)>> {
        (0..c).map(|_| Ok((self.usize()?, self.usize()?))).collect()
    }
    fn raw_matrix(&mut self, rows: usize, cols: usize) -> Result<DenseMatrix> {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Format("matrix too large".into()))?;
        Ok(DenseMatrix::from_vec(rows, cols, self.raw_f64s(len)?))
    }
    fn matrix(&mut self) -> Result<DenseMatrix> {
        let rows = self.usize()?;
        let cols = self.usize()?;
        self.raw_matrix(rows, cols)
    }
}

fn put_basis(e: &mut Enc, b: &PodBasis) {
    e.matrix(&b.u);
    e.f64s(&b.singulars);
    e.usize(b.k);
    e.f64(b.gamma);
    e.u8(b.centered as u8);
    e.f64s(&b.mean);
}

fn get_basis(d: &mut Dec) -> Result<PodBasis> {
    let u = d.matrix()?;
    let singulars = d.f64s()?;
    let k = d.usize()?;
    let gamma = d.f64()?;
    let centered = d.u8()? != 0;
    let mean = d.f64s()?;
    if k != u.ncols() || mean.len() != u.nrows() {
        return Err(Error::Format("inconsistent basis block".into()));
    }
    Ok(PodBasis {
        u,
        singulars,
        k,
        gamma,
        centered,
        mean,
    })
}

fn put_deim(e: &mut Enc, it: &DeimInterpolant) {
    e.usizes(&it.indexes);
    e.matrix(&it.basis);
    e.matrix(&it.projector);
    e.f64(it.inverse_norm);
}

fn get_deim(d: &mut Dec) -> Result<DeimInterpolant> {
    let indexes = d.usizes()?;
    let basis = d.matrix()?;
    let projector = d.matrix()?;
    let inverse_norm = d.f64()?;
    DeimInterpolant::from_parts(basis, indexes, projector, inverse_norm)
}

fn put_mint(e: &mut Enc, it: &MatrixInterpolant) {
    e.u8(match it.mode {
        InterpolantMode::Sparse => 0,
        InterpolantMode::DenseReference => 1,
    });
    e.usize(it.pattern.n());
    e.coords(it.pattern.coords());
    e.coords(&it.sample_coords);
    e.f64s(&it.singulars);
    put_deim(e, &it.interpolant);
}

fn get_mint(d: &mut Dec) -> Result<MatrixInterpolant> {
    let mode = match d.u8()? {
        0 => InterpolantMode::Sparse,
        1 => InterpolantMode::DenseReference,
        t => return Err(Error::Format(format!("unknown interpolant mode {t}"))),
    };
    let n = d.usize()?;
    let pattern = SparsityPattern::new(n, d.coords()?)?;
    let sample_coords = d.coords()?;
    let singulars = d.f64s()?;
    let interpolant = get_deim(d)?;
    Ok(MatrixInterpolant {
        pattern,
        interpolant,
        sample_coords,
        mode,
        singulars,
    })
}

fn put_stage(e: &mut Enc, st: &ReducedStage) {
    let t = &st.tensorial;
    e.f64s(&t.f_bar);
    e.matrix(&t.linear);
    e.matrix(&t.t1);
    e.matrix(&t.g);
    e.matrix(&t.g_sym);
    match &st.jacobian {
        JacobianPayload::DirectProjection => e.u8(0),
        JacobianPayload::Tensorial => e.u8(1),
        JacobianPayload::DirectionalDerivative { h } => {
            e.u8(2);
            e.f64(*h);
        }
        JacobianPayload::Deim {
            coefficients,
            rows,
            terms,
        } => {
            e.u8(3);
            e.matrix(coefficients);
            e.usizes(rows);
            e.usize(terms.len());
            for t in terms {
                e.f64s(&t.alpha);
                e.f64s(&t.left_bar);
                e.f64s(&t.right_bar);
                e.matrix(&t.left_u);
                e.matrix(&t.right_u);
            }
        }
        JacobianPayload::Hyper(hp) => {
            e.u8(4);
            e.matrix(&hp.product);
            e.coords(&hp.sample_coords);
            e.f64s(&hp.sample_bar);
            e.matrix(&hp.sample_basis);
        }
    }
}

fn get_stage(d: &mut Dec) -> Result<ReducedStage> {
    let tensorial = TensorialPayload {
        f_bar: d.f64s()?,
        linear: d.matrix()?,
        t1: d.matrix()?,
        g: d.matrix()?,
        g_sym: d.matrix()?,
    };
    let jacobian = match d.u8()? {
        0 => JacobianPayload::DirectProjection,
        1 => JacobianPayload::Tensorial,
        2 => JacobianPayload::DirectionalDerivative { h: d.f64()? },
        3 => {
            let coefficients = d.matrix()?;
            let rows = d.usizes()?;
            let count = d.count(8)?;
            let mut terms = Vec::with_capacity(count);
            for _ in 0..count {
                terms.push(DeimTermPayload {
                    alpha: d.f64s()?,
                    left_bar: d.f64s()?,
                    right_bar: d.f64s()?,
                    left_u: d.matrix()?,
                    right_u: d.matrix()?,
                });
            }
            JacobianPayload::Deim {
                coefficients,
                rows,
                terms,
            }
        }
        4 => JacobianPayload::Hyper(HyperReductionPayload {
            product: d.matrix()?,
            sample_coords: d.coords()?,
            sample_bar: d.f64s()?,
            sample_basis: d.matrix()?,
        }),
        t => return Err(Error::Format(format!("unknown Jacobian payload tag {t}"))),
    };
    Ok(ReducedStage { tensorial, jacobian })
}

impl Artifact {
    /// Artifact wrapping a snapshot set.
    pub fn from_snapshots(snap: SnapshotSet) -> Self {
        Self {
            model_id: snap.model_id.clone(),
            n: snap.n(),
            dt: snap.dt,
            config_hash: Some(snap.config_hash),
            snapshots: Some(snap),
            ..Self::default()
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut e = Enc::default();
        e.0.extend_from_slice(MAGIC);
        e.u32(VERSION);
        e.str(&self.model_id);
        e.usize(self.n);
        match &self.snapshots {
            Some(s) => {
                let first = &s.stages[0];
                e.usize(s.columns());
                e.usize(first.pattern.r());
                e.f64(self.dt);
                e.raw_coords(first.pattern.coords());
                e.raw_f64s(s.states.as_slice());
                e.raw_f64s(s.nonlinear.as_slice());
                e.raw_f64s(first.values.as_slice());
                for st in &s.stages[1..] {
                    let mut b = Enc::default();
                    b.coords(st.pattern.coords());
                    b.matrix(&st.values);
                    e.block(b"STGE", b);
                }
            }
            None => {
                e.usize(0);
                e.usize(0);
                e.f64(self.dt);
            }
        }
        if let Some(h) = self.config_hash {
            let mut b = Enc::default();
            b.u64(h);
            e.block(b"HASH", b);
        }
        if let Some(basis) = &self.basis {
            let mut b = Enc::default();
            put_basis(&mut b, basis);
            e.block(b"PODB", b);
        }
        if let Some(it) = &self.function_interpolant {
            let mut b = Enc::default();
            put_deim(&mut b, it);
            e.block(b"DEIM", b);
        }
        for it in &self.matrix_interpolants {
            let mut b = Enc::default();
            put_mint(&mut b, it);
            e.block(b"MINT", b);
        }
        if let Some(rp) = &self.reduced {
            let mut b = Enc::default();
            b.str(rp.strategy.name());
            put_basis(&mut b, &rp.basis);
            b.f64(rp.offline_seconds);
            b.usize(rp.stages.len());
            for st in &rp.stages {
                put_stage(&mut b, st);
            }
            e.block(b"REDM", b);
        }
        e.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut d = Dec { buf: bytes, pos: 0 };
        if d.take(4).ok() != Some(MAGIC.as_slice()) {
            return Err(Error::Format("not an artifact file (bad magic)".into()));
        }
        let version = d.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported artifact version {version}")));
        }
        let model_id = d.str()?;
        let n = d.usize()?;
        let cols = d.usize()?;
        let r = d.usize()?;
        let dt = d.f64()?;
        let mut first = None;
        if cols > 0 || r > 0 {
            let coords = d.raw_coords(r)?;
            let states = d.raw_matrix(n, cols)?;
            let nonlinear = d.raw_matrix(n, cols)?;
            let values = d.raw_matrix(r, cols)?;
            first = Some((states, nonlinear, StageJacobians {
                pattern: SparsityPattern::new(n, coords)?,
                values,
            }));
        }
        let mut art = Artifact {
            model_id,
            n,
            dt,
            ..Self::default()
        };
        let mut extra_stages = Vec::new();
        while !d.done() {
            let tag: [u8; 4] = d.take(4)?.try_into().unwrap();
            let len = d.usize()?;
            let mut b = Dec { buf: d.take(len)?, pos: 0 };
            match &tag {
                b"STGE" => {
                    let coords = b.coords()?;
                    let values = b.matrix()?;
                    extra_stages.push(StageJacobians {
                        pattern: SparsityPattern::new(n, coords)?,
                        values,
                    });
                }
                b"HASH" => art.config_hash = Some(b.u64()?),
                b"PODB" => art.basis = Some(get_basis(&mut b)?),
                b"DEIM" => art.function_interpolant = Some(get_deim(&mut b)?),
                b"MINT" => art.matrix_interpolants.push(get_mint(&mut b)?),
                b"REDM" => {
                    let strategy = b.str()?.parse()?;
                    let basis = get_basis(&mut b)?;
                    let offline_seconds = b.f64()?;
                    let count = b.count(1)?;
                    let stages = (0..count).map(|_| get_stage(&mut b)).collect::<Result<_>>()?;
                    art.reduced = Some(ReducedPayload {
                        strategy,
                        basis,
                        stages,
                        offline_seconds,
                    });
                }
                _ => {}
            }
        }
        if let Some((states, nonlinear, stage0)) = first {
            let mut stages = vec![stage0];
            stages.extend(extra_stages);
            art.snapshots = Some(SnapshotSet::new(
                art.model_id.clone(),
                art.config_hash.unwrap_or(0),
                dt,
                states,
                nonlinear,
                stages,
            )?);
        }
        Ok(art)
    }

    /// Writes through a temporary sibling file and renames it into place.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("partial");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&self.to_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

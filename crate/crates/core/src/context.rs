//! Shared computation context: a root datum plus the memo tables used by the
//! character, Kostka and Satake layers.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use crate::characters::CharacterExpansion;
use crate::error::Result;
use crate::kostka::{DiskCache, KostantEngine, QPoly};
use crate::laurent::LaurentCoeff;
use crate::root_datum::{RootDatum, WeightVec};

type Pair = (WeightVec, WeightVec);

type TensorMemo = RwLock<HashMap<Pair, Arc<Vec<(WeightVec, i64)>>>>;

pub struct Context {
    rd: Arc<RootDatum>,
    engine: KostantEngine,
    k_memo: RwLock<HashMap<Pair, QPoly>>,
    weights: RwLock<HashMap<WeightVec, Arc<CharacterExpansion>>>,
    tensor: TensorMemo,
    satake_basis: RwLock<HashMap<WeightVec, Arc<BTreeMap<WeightVec, LaurentCoeff>>>>,
    sym: Mutex<HashMap<WeightVec, Vec<CharacterExpansion>>>,
    disk: Option<DiskCache>,
}

impl Context {
    pub fn new(rd: RootDatum) -> Context {
        let engine = KostantEngine::new(&rd);
        Context {
            rd: Arc::new(rd),
            engine,
            k_memo: RwLock::new(HashMap::new()),
            weights: RwLock::new(HashMap::new()),
            tensor: RwLock::new(HashMap::new()),
            satake_basis: RwLock::new(HashMap::new()),
            sym: Mutex::new(HashMap::new()),
            disk: None,
        }
    }

    /// Attaches the on-disk Kostka cache in `dir`.
    pub fn with_cache_dir(mut self, dir: &Path) -> Result<Context> {
        self.disk = Some(DiskCache::open(dir)?);
        Ok(self)
    }

    pub fn rd(&self) -> &RootDatum {
        &self.rd
    }

    pub fn disk(&self) -> Option<&DiskCache> {
        self.disk.as_ref()
    }

    pub(crate) fn engine(&self) -> &KostantEngine {
        &self.engine
    }

    pub(crate) fn k_memo(&self) -> &RwLock<HashMap<Pair, QPoly>> {
        &self.k_memo
    }

    pub(crate) fn weight_memo(&self) -> &RwLock<HashMap<WeightVec, Arc<CharacterExpansion>>> {
        &self.weights
    }

    pub(crate) fn tensor_memo(&self) -> &TensorMemo {
        &self.tensor
    }

    pub(crate) fn satake_memo(
        &self,
    ) -> &RwLock<HashMap<WeightVec, Arc<BTreeMap<WeightVec, LaurentCoeff>>>> {
        &self.satake_basis
    }

    pub(crate) fn sym_memo(&self) -> &Mutex<HashMap<WeightVec, Vec<CharacterExpansion>>> {
        &self.sym
    }
}

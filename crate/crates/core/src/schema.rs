//! Versioned JSON descriptors for groups, characters, modules, and
//! cochains, plus their realization into live objects.
//!
//! Unknown fields are rejected everywhere rather than ignored: a typo
//! in an input file must fail loudly instead of silently computing
//! something else. Group descriptors are tagged by a `kind` field with
//! the remaining fields inline, so the dispatch is done by hand against
//! per-kind parameter structs that each deny unknown fields.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::cohomology::{CohomClass, Cochain, CohomologyError, GModule};
use crate::groups::{
    from_matrix_generators, FiniteGroup, GroupError, MatrixGroup, MATRIX_CLOSURE_CAP,
};
use crate::limits::{Budget, BudgetExceeded};
use crate::linalg::{LinalgError, MatP, Prime, VecP};
use crate::unipotent::{UnipotentError, UnitriangularGroup};

/// Version stamp common to all input and output schemas.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("unsupported format version {0}, expected {FORMAT_VERSION}")]
    UnsupportedVersion(u32),
    #[error("invalid JSON: {0}")]
    InvalidJson(String),
    #[error("no character named {0:?} in the group file")]
    UnknownCharacter(String),
    #[error("character {name:?} has {got} generator values, group has {expected} generators")]
    CharacterArity { name: String, expected: usize, got: usize },
    #[error("unrecognized module spec {0:?}; use \"trivial\", \"trivialK\", or \"colvecK\"")]
    BadModuleSpec(String),
    #[error("module spec {0:?} needs a matrix group, but the group has no matrices")]
    ModuleNeedsMatrices(String),
    #[error("module spec asks for dimension {wanted}, group matrices have dimension {have}")]
    ModuleDimension { wanted: usize, have: usize },
    #[error("cochain table does not match the module: {0}")]
    CochainMismatch(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Unipotent(#[from] UnipotentError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

/// Top-level group input file: a descriptor plus named characters given
/// by their values on the realized group's generators.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub version: u32,
    pub group: GroupDescriptor,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub chars: BTreeMap<String, Vec<u32>>,
}

impl GroupFile {
    pub fn parse(text: &str) -> Result<GroupFile, SchemaError> {
        let file: GroupFile =
            serde_json::from_str(text).map_err(|e| SchemaError::InvalidJson(e.to_string()))?;
        if file.version != FORMAT_VERSION {
            return Err(SchemaError::UnsupportedVersion(file.version));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("group file serializes")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct TableParams {
    pub mul: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CyclicParams {
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ElemAbelianParams {
    pub p: u32,
    pub k: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ProductParams {
    pub left: Box<GroupDescriptor>,
    pub right: Box<GroupDescriptor>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct MatrixGensParams {
    pub p: u32,
    pub dim: usize,
    /// Generator matrices, row-major.
    pub generators: Vec<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct UnitriangularParams {
    pub p: u32,
    pub size: usize,
    /// When set, take the quotient by the corner entry.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub corner_omitted: bool,
}

/// A group given by one of the supported constructions. The JSON form
/// is an object with a `kind` tag and the construction's fields inline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupDescriptor {
    Table(TableParams),
    Cyclic(CyclicParams),
    ElemAbelian(ElemAbelianParams),
    Product(ProductParams),
    MatrixGens(MatrixGensParams),
    Unitriangular(UnitriangularParams),
}

impl GroupDescriptor {
    fn kind(&self) -> &'static str {
        match self {
            GroupDescriptor::Table(_) => "table",
            GroupDescriptor::Cyclic(_) => "cyclic",
            GroupDescriptor::ElemAbelian(_) => "elem_abelian",
            GroupDescriptor::Product(_) => "product",
            GroupDescriptor::MatrixGens(_) => "matrix_gens",
            GroupDescriptor::Unitriangular(_) => "unitriangular",
        }
    }
}

impl Serialize for GroupDescriptor {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let value = match self {
            GroupDescriptor::Table(p) => serde_json::to_value(p),
            GroupDescriptor::Cyclic(p) => serde_json::to_value(p),
            GroupDescriptor::ElemAbelian(p) => serde_json::to_value(p),
            GroupDescriptor::Product(p) => serde_json::to_value(p),
            GroupDescriptor::MatrixGens(p) => serde_json::to_value(p),
            GroupDescriptor::Unitriangular(p) => serde_json::to_value(p),
        };
        let mut value = value.map_err(S::Error::custom)?;
        let obj = value.as_object_mut().expect("params serialize to an object");
        obj.insert("kind".to_owned(), serde_json::Value::String(self.kind().to_owned()));
        value.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GroupDescriptor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let mut map = serde_json::Map::deserialize(deserializer)?;
        let kind = map
            .remove("kind")
            .ok_or_else(|| D::Error::missing_field("kind"))?;
        let kind = kind
            .as_str()
            .map(str::to_owned)
            .ok_or_else(|| D::Error::custom("`kind` must be a string"))?;
        let rest = serde_json::Value::Object(map);
        let parsed = match kind.as_str() {
            "table" => serde_json::from_value(rest).map(GroupDescriptor::Table),
            "cyclic" => serde_json::from_value(rest).map(GroupDescriptor::Cyclic),
            "elem_abelian" => serde_json::from_value(rest).map(GroupDescriptor::ElemAbelian),
            "product" => serde_json::from_value(rest).map(GroupDescriptor::Product),
            "matrix_gens" => serde_json::from_value(rest).map(GroupDescriptor::MatrixGens),
            "unitriangular" => serde_json::from_value(rest).map(GroupDescriptor::Unitriangular),
            other => {
                return Err(D::Error::custom(format!(
                    "unknown group kind {other:?}; expected one of \
                     table, cyclic, elem_abelian, product, matrix_gens, unitriangular"
                )))
            }
        };
        parsed.map_err(|e| D::Error::custom(format!("in {kind:?} group: {e}")))
    }
}

/// A descriptor realized into a live group, with the per-element
/// matrices kept when the construction provides them.
#[derive(Debug, Clone)]
pub struct RealizedGroup {
    pub group: Arc<FiniteGroup>,
    pub matrices: Option<MatrixGroup>,
}

pub fn realize_group(
    descriptor: &GroupDescriptor,
    budget: &Budget,
) -> Result<RealizedGroup, SchemaError> {
    let plain = |group: FiniteGroup| RealizedGroup { group: Arc::new(group), matrices: None };
    Ok(match descriptor {
        GroupDescriptor::Table(params) => match &params.labels {
            Some(labels) => plain(FiniteGroup::from_mul_table_labeled(
                params.mul.clone(),
                labels.clone(),
            )?),
            None => plain(FiniteGroup::from_mul_table(params.mul.clone())?),
        },
        GroupDescriptor::Cyclic(params) => plain(FiniteGroup::cyclic(params.n)?),
        GroupDescriptor::ElemAbelian(params) => {
            plain(FiniteGroup::elementary_abelian(params.p, params.k)?)
        }
        GroupDescriptor::Product(params) => {
            let left = realize_group(&params.left, budget)?;
            let right = realize_group(&params.right, budget)?;
            plain(FiniteGroup::direct_product(&left.group, &right.group)?)
        }
        GroupDescriptor::MatrixGens(params) => {
            let p = Prime::new(params.p)?;
            let gens: Vec<MatP> = params
                .generators
                .iter()
                .map(|g| MatP::from_nested(p, g))
                .collect::<Result<_, _>>()?;
            let mg = from_matrix_generators(params.p, params.dim, &gens, MATRIX_CLOSURE_CAP)?;
            RealizedGroup { group: Arc::clone(&mg.group), matrices: Some(mg) }
        }
        GroupDescriptor::Unitriangular(params) => {
            let ut = if params.corner_omitted {
                UnitriangularGroup::corner_quotient(params.size, params.p, budget)?
            } else {
                UnitriangularGroup::full(params.size, params.p, budget)?
            };
            RealizedGroup { group: Arc::clone(ut.group()), matrices: None }
        }
    })
}

/// A coefficient-module request: either trivial of some dimension, or
/// the natural column-vector module of a matrix group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModuleSpec {
    Trivial { dim: usize },
    Colvec { dim: usize },
}

impl ModuleSpec {
    /// Parse `"trivial"`, `"trivialK"`, or `"colvecK"`.
    pub fn parse(spec: &str) -> Result<ModuleSpec, SchemaError> {
        let bad = || SchemaError::BadModuleSpec(spec.to_owned());
        if spec == "trivial" {
            return Ok(ModuleSpec::Trivial { dim: 1 });
        }
        if let Some(rest) = spec.strip_prefix("trivial") {
            let dim: usize = rest.parse().map_err(|_| bad())?;
            if dim == 0 {
                return Err(bad());
            }
            return Ok(ModuleSpec::Trivial { dim });
        }
        if let Some(rest) = spec.strip_prefix("colvec") {
            let dim: usize = rest.parse().map_err(|_| bad())?;
            if dim == 0 {
                return Err(bad());
            }
            return Ok(ModuleSpec::Colvec { dim });
        }
        Err(bad())
    }

    pub fn build(
        self,
        realized: &RealizedGroup,
        p: Prime,
    ) -> Result<Arc<GModule>, SchemaError> {
        match self {
            ModuleSpec::Trivial { dim } => {
                Ok(GModule::trivial(Arc::clone(&realized.group), p, dim))
            }
            ModuleSpec::Colvec { dim } => {
                let Some(mg) = &realized.matrices else {
                    return Err(SchemaError::ModuleNeedsMatrices(format!("colvec{dim}")));
                };
                let have = mg.matrices[0].rows();
                if have != dim {
                    return Err(SchemaError::ModuleDimension { wanted: dim, have });
                }
                Ok(GModule::new(
                    Arc::clone(&realized.group),
                    p,
                    dim,
                    mg.matrices.clone(),
                )?)
            }
        }
    }
}

/// Realize a named character from a group file as a certified class:
/// the values are taken on the realized group's generators and must
/// extend to a homomorphism into `Z/p`.
pub fn character_class(
    file: &GroupFile,
    name: &str,
    module: &Arc<GModule>,
    budget: &Budget,
) -> Result<CohomClass, SchemaError> {
    let values = file
        .chars
        .get(name)
        .ok_or_else(|| SchemaError::UnknownCharacter(name.to_owned()))?;
    let expected = module.group().generators().len();
    if values.len() != expected {
        return Err(SchemaError::CharacterArity {
            name: name.to_owned(),
            expected,
            got: values.len(),
        });
    }
    let rep = Cochain::from_generator_values(Arc::clone(module), values, budget)?;
    Ok(CohomClass::new(rep, budget)?)
}

/// One nonzero cochain table entry: the argument tuple and the value
/// vector in module coordinates.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CochainEntry {
    pub tuple: Vec<u32>,
    pub value: Vec<u32>,
}

/// Serialized cochain: degree, module shape, and the nonzero table
/// entries in ascending tuple order.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CochainFile {
    pub version: u32,
    pub p: u32,
    pub degree: usize,
    pub module: String,
    pub dim: usize,
    pub entries: Vec<CochainEntry>,
}

pub fn encode_cochain(cochain: &Cochain) -> CochainFile {
    let module = cochain.module();
    let group_order = module.group().order();
    let degree = cochain.degree();
    let total = (group_order as u64).pow(degree as u32);
    let mut entries = Vec::new();
    let mut tuple = vec![0u32; degree];
    for idx in 0..total {
        decode_index(idx, group_order as u64, &mut tuple);
        let value = cochain.value(&tuple);
        if !value.is_zero() {
            entries.push(CochainEntry {
                tuple: tuple.clone(),
                value: value.to_u32_vec(),
            });
        }
    }
    CochainFile {
        version: FORMAT_VERSION,
        p: module.modulus().get(),
        degree,
        module: if module.is_trivial() { "trivial".to_owned() } else { "colvec".to_owned() },
        dim: module.dim(),
        entries,
    }
}

/// Rebuild a cochain over a known module, validating shape agreement.
pub fn decode_cochain(
    file: &CochainFile,
    module: &Arc<GModule>,
    budget: &Budget,
) -> Result<Cochain, SchemaError> {
    if file.version != FORMAT_VERSION {
        return Err(SchemaError::UnsupportedVersion(file.version));
    }
    if file.p != module.modulus().get() || file.dim != module.dim() {
        return Err(SchemaError::CochainMismatch(format!(
            "file has p={}, dim={}, module has p={}, dim={}",
            file.p,
            file.dim,
            module.modulus().get(),
            module.dim()
        )));
    }
    let mut out = Cochain::zero(Arc::clone(module), file.degree, budget)?;
    let order = module.group().order() as u32;
    for entry in &file.entries {
        if entry.tuple.len() != file.degree || entry.tuple.iter().any(|&g| g >= order) {
            return Err(SchemaError::CochainMismatch(format!(
                "bad tuple {:?} for degree {} over a group of order {order}",
                entry.tuple, file.degree
            )));
        }
        if entry.value.len() != file.dim {
            return Err(SchemaError::CochainMismatch(format!(
                "value {:?} has wrong dimension, expected {}",
                entry.value, file.dim
            )));
        }
        out.set_value(&entry.tuple, &VecP::from_u32s(module.modulus(), &entry.value));
    }
    Ok(out)
}

fn decode_index(mut idx: u64, order: u64, out: &mut [u32]) {
    for slot in out.iter_mut().rev() {
        *slot = (idx % order) as u32;
        idx /= order;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget() -> Budget {
        Budget::default()
    }

    #[test]
    fn descriptor_round_trips_through_json() {
        let descriptors = vec![
            GroupDescriptor::Cyclic(CyclicParams { n: 6 }),
            GroupDescriptor::ElemAbelian(ElemAbelianParams { p: 3, k: 2 }),
            GroupDescriptor::Product(ProductParams {
                left: Box::new(GroupDescriptor::Cyclic(CyclicParams { n: 2 })),
                right: Box::new(GroupDescriptor::Cyclic(CyclicParams { n: 4 })),
            }),
            GroupDescriptor::Unitriangular(UnitriangularParams {
                p: 2,
                size: 4,
                corner_omitted: true,
            }),
            GroupDescriptor::MatrixGens(MatrixGensParams {
                p: 2,
                dim: 2,
                generators: vec![vec![vec![1, 1], vec![0, 1]]],
            }),
        ];
        for d in descriptors {
            let text = serde_json::to_string(&d).unwrap();
            let back: GroupDescriptor = serde_json::from_str(&text).unwrap();
            assert_eq!(back, d, "{text}");
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let top = r#"{"version": 1, "group": {"kind": "cyclic", "n": 4}, "extra": 1}"#;
        assert!(GroupFile::parse(top).is_err());
        let inner = r#"{"version": 1, "group": {"kind": "cyclic", "n": 4, "m": 5}}"#;
        assert!(GroupFile::parse(inner).is_err());
        let bad_kind = r#"{"version": 1, "group": {"kind": "dihedral", "n": 4}}"#;
        let err = GroupFile::parse(bad_kind).unwrap_err();
        assert!(err.to_string().contains("dihedral"), "{err}");
    }

    #[test]
    fn version_is_enforced() {
        let text = r#"{"version": 2, "group": {"kind": "cyclic", "n": 4}}"#;
        match GroupFile::parse(text) {
            Err(SchemaError::UnsupportedVersion(2)) => {}
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn realize_all_kinds() {
        let b = budget();
        let z6 = realize_group(&GroupDescriptor::Cyclic(CyclicParams { n: 6 }), &b).unwrap();
        assert_eq!(z6.group.order(), 6);
        let v4 = realize_group(
            &GroupDescriptor::ElemAbelian(ElemAbelianParams { p: 2, k: 2 }),
            &b,
        )
        .unwrap();
        assert_eq!(v4.group.order(), 4);
        let prod = realize_group(
            &GroupDescriptor::Product(ProductParams {
                left: Box::new(GroupDescriptor::Cyclic(CyclicParams { n: 2 })),
                right: Box::new(GroupDescriptor::Cyclic(CyclicParams { n: 3 })),
            }),
            &b,
        )
        .unwrap();
        assert_eq!(prod.group.order(), 6);
        let mul = vec![vec![0u32, 1], vec![1, 0]];
        let table = realize_group(
            &GroupDescriptor::Table(TableParams { mul, labels: None }),
            &b,
        )
        .unwrap();
        assert_eq!(table.group.order(), 2);
        let u4 = realize_group(
            &GroupDescriptor::Unitriangular(UnitriangularParams {
                p: 2,
                size: 4,
                corner_omitted: false,
            }),
            &b,
        )
        .unwrap();
        assert_eq!(u4.group.order(), 64);
        let mg = realize_group(
            &GroupDescriptor::MatrixGens(MatrixGensParams {
                p: 2,
                dim: 2,
                generators: vec![vec![vec![1, 1], vec![0, 1]]],
            }),
            &b,
        )
        .unwrap();
        assert_eq!(mg.group.order(), 2);
        assert!(mg.matrices.is_some());
    }

    #[test]
    fn module_specs_parse_and_build() {
        let b = budget();
        assert_eq!(ModuleSpec::parse("trivial").unwrap(), ModuleSpec::Trivial { dim: 1 });
        assert_eq!(ModuleSpec::parse("trivial2").unwrap(), ModuleSpec::Trivial { dim: 2 });
        assert_eq!(ModuleSpec::parse("colvec3").unwrap(), ModuleSpec::Colvec { dim: 3 });
        assert!(ModuleSpec::parse("colvec").is_err());
        assert!(ModuleSpec::parse("banana").is_err());
        assert!(ModuleSpec::parse("trivial0").is_err());

        let realized =
            realize_group(&GroupDescriptor::Cyclic(CyclicParams { n: 4 }), &b).unwrap();
        let p = Prime::new(2).unwrap();
        let m = ModuleSpec::Trivial { dim: 1 }.build(&realized, p).unwrap();
        assert!(m.is_trivial());
        assert!(matches!(
            ModuleSpec::Colvec { dim: 3 }.build(&realized, p),
            Err(SchemaError::ModuleNeedsMatrices(_))
        ));

        let mg = realize_group(
            &GroupDescriptor::MatrixGens(MatrixGensParams {
                p: 2,
                dim: 2,
                generators: vec![vec![vec![1, 1], vec![0, 1]]],
            }),
            &b,
        )
        .unwrap();
        let col = ModuleSpec::Colvec { dim: 2 }.build(&mg, p).unwrap();
        assert_eq!(col.dim(), 2);
        assert!(matches!(
            ModuleSpec::Colvec { dim: 3 }.build(&mg, p),
            Err(SchemaError::ModuleDimension { wanted: 3, have: 2 })
        ));
    }

    #[test]
    fn characters_come_from_generator_values() {
        let b = budget();
        let text = r#"{
            "version": 1,
            "group": {"kind": "cyclic", "n": 4},
            "chars": {"chi": [1], "zero": [0]}
        }"#;
        let file = GroupFile::parse(text).unwrap();
        let realized = realize_group(&file.group, &b).unwrap();
        let module =
            GModule::trivial(Arc::clone(&realized.group), Prime::new(2).unwrap(), 1);
        let chi = character_class(&file, "chi", &module, &b).unwrap();
        assert!(!chi.is_zero_class(&b).unwrap());
        let zero = character_class(&file, "zero", &module, &b).unwrap();
        assert!(zero.is_zero_class(&b).unwrap());
        assert!(matches!(
            character_class(&file, "missing", &module, &b),
            Err(SchemaError::UnknownCharacter(_))
        ));
        let short = GroupFile {
            chars: [("chi".to_owned(), vec![1, 0])].into_iter().collect(),
            ..file
        };
        assert!(matches!(
            character_class(&short, "chi", &module, &b),
            Err(SchemaError::CharacterArity { .. })
        ));
    }

    #[test]
    fn cochain_round_trips_sparsely() {
        let b = budget();
        let g = Arc::new(FiniteGroup::cyclic(3).unwrap());
        let module = GModule::trivial(g, Prime::new(3).unwrap(), 1);
        let mut c = Cochain::zero(Arc::clone(&module), 2, &b).unwrap();
        c.set_scalar(&[1, 2], 2);
        c.set_scalar(&[2, 0], 1);
        let file = encode_cochain(&c);
        assert_eq!(file.entries.len(), 2);
        assert_eq!(file.entries[0].tuple, vec![1, 2]);
        let back = decode_cochain(&file, &module, &b).unwrap();
        assert_eq!(back, c);
        let mut wrong = file.clone();
        wrong.dim = 2;
        assert!(decode_cochain(&wrong, &module, &b).is_err());
    }
}

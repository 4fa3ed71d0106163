//! Batch front door for the cochains library: parse group and
//! character descriptors, dispatch one computation per invocation, and
//! emit a versioned, machine-readable report.
//!
//! Exit codes: 0 = computed, 1 = input error, 2 = negative mathematical
//! verdict where the command treats one as failure (an undefined
//! product, an unsolvable problem), 3 = budget exceeded. Reports go to
//! stdout, diagnostics to stderr. Identical invocations emit
//! byte-identical reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cochains::cohomology::{
    coboundary_space, cocycle_space, h1_star, CohomClass, CohomologyError, GModule,
};
use cochains::embed::{
    center_extension, local_global_vanishing, superdiagonal_extension, EmbedError,
    WeakEmbeddingProblem,
};
use cochains::groups::{FiniteGroup, GroupError, GroupHom, Subgroup};
use cochains::limits::{Budget, BudgetExceeded};
use cochains::linalg::Prime;
use cochains::massey::{
    contains_zero, nfold_vanishes, triple_massey, DefiningSystem, MasseyError, NfoldVerdict,
    Strategy, TripleProduct,
};
use cochains::schema::{
    character_class, encode_cochain, realize_group, CochainFile, GroupFile, ModuleSpec,
    RealizedGroup, SchemaError, FORMAT_VERSION,
};
use cochains::unipotent::UnipotentError;

#[derive(Parser)]
#[command(
    name = "cochains",
    version,
    about = "Exact cohomology, Massey products, and embedding problems for finite groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Space budget in table cells; other limits scale from it.
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Enumerate,
    Dwyer,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExtensionArg {
    /// `U_4(F_p)` over its superdiagonal abelianization.
    Superdiagonal,
    /// `U_n(F_p)` over the quotient by the corner entry.
    Center,
}

#[derive(Args)]
struct GroupInput {
    /// Group file (JSON).
    #[arg(long)]
    group: PathBuf,
}

#[derive(Args)]
struct CoefficientInput {
    /// Coefficient field characteristic.
    #[arg(long)]
    p: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Order, exponent, and generator data of a group.
    GroupInfo {
        #[command(flatten)]
        group: GroupInput,
    },
    /// Dimensions of cocycles, coboundaries, and cohomology in one degree.
    Cohomology {
        #[command(flatten)]
        group: GroupInput,
        #[command(flatten)]
        coeff: CoefficientInput,
        /// Cohomological degree.
        #[arg(long)]
        n: usize,
        /// Coefficient module: "trivial", "trivialK", or "colvecK".
        #[arg(long, default_value = "trivial")]
        module: String,
    },
    /// Cup product of two named characters.
    Cup {
        #[command(flatten)]
        group: GroupInput,
        #[command(flatten)]
        coeff: CoefficientInput,
        /// Two comma-separated character names from the group file.
        #[arg(long)]
        chars: String,
    },
    /// Massey product of named characters: the full value coset for
    /// three inputs, a vanishing verdict for more.
    Massey {
        #[command(flatten)]
        group: GroupInput,
        #[command(flatten)]
        coeff: CoefficientInput,
        /// Comma-separated character names from the group file.
        #[arg(long)]
        chars: String,
    },
    /// n-fold vanishing verdict through defining systems or unipotent
    /// homomorphism lifting.
    Dwyer {
        #[command(flatten)]
        group: GroupInput,
        #[command(flatten)]
        coeff: CoefficientInput,
        /// Comma-separated character names from the group file.
        #[arg(long)]
        chars: String,
        #[arg(long, value_enum, default_value_t = StrategyArg::Dwyer)]
        strategy: StrategyArg,
    },
    /// Weak embedding problem along a unitriangular extension.
    Embed {
        #[command(flatten)]
        group: GroupInput,
        #[command(flatten)]
        coeff: CoefficientInput,
        /// Images of the group's generators in the extension quotient,
        /// as comma-separated element indices.
        #[arg(long)]
        alpha: String,
        #[arg(long, value_enum, default_value_t = ExtensionArg::Superdiagonal)]
        extension: ExtensionArg,
        /// Matrix size for the center extension.
        #[arg(long, default_value_t = 4)]
        size: usize,
    },
    /// Dimension of the classes restricting to coboundaries on every
    /// cyclic subgroup.
    Hstar {
        #[command(flatten)]
        group: GroupInput,
        #[command(flatten)]
        coeff: CoefficientInput,
        /// Coefficient module: "trivial", "trivialK", or "colvecK".
        #[arg(long, default_value = "trivial")]
        module: String,
    },
    /// Local-global analysis of a triple product's lifting problem.
    LocalGlobal {
        #[command(flatten)]
        group: GroupInput,
        #[command(flatten)]
        coeff: CoefficientInput,
        /// Three comma-separated character names from the group file.
        #[arg(long)]
        chars: String,
        /// "cyclic", "whole", or semicolon-separated generator lists
        /// like "1;2,3".
        #[arg(long, default_value = "cyclic")]
        subgroups: String,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::GroupInfo { .. } => "group-info",
            Command::Cohomology { .. } => "cohomology",
            Command::Cup { .. } => "cup",
            Command::Massey { .. } => "massey",
            Command::Dwyer { .. } => "dwyer",
            Command::Embed { .. } => "embed",
            Command::Hstar { .. } => "hstar",
            Command::LocalGlobal { .. } => "local-global",
        }
    }
}

/// What a run produces besides the report itself.
enum Outcome {
    Computed,
    /// Negative verdict the command treats as failure.
    Negative,
}

enum CliError {
    Input(String),
    Budget(BudgetExceeded),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Budget(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Budget(b) => write!(f, "{b}"),
        }
    }
}

fn budget_in_cohomology(e: &CohomologyError) -> Option<BudgetExceeded> {
    match e {
        CohomologyError::Budget(b) => Some(b.clone()),
        _ => None,
    }
}

fn budget_in_unipotent(e: &UnipotentError) -> Option<BudgetExceeded> {
    match e {
        UnipotentError::Budget(b) => Some(b.clone()),
        UnipotentError::Group(_) | UnipotentError::Linalg(_) => None,
        _ => None,
    }
}

fn budget_in_massey(e: &MasseyError) -> Option<BudgetExceeded> {
    match e {
        MasseyError::Budget(b) => Some(b.clone()),
        MasseyError::Cohomology(c) => budget_in_cohomology(c),
        MasseyError::Unipotent(u) => budget_in_unipotent(u),
        _ => None,
    }
}

fn budget_in_embed(e: &EmbedError) -> Option<BudgetExceeded> {
    match e {
        EmbedError::Budget(b) => Some(b.clone()),
        EmbedError::Cohomology(c) => budget_in_cohomology(c),
        EmbedError::Unipotent(u) => budget_in_unipotent(u),
        EmbedError::Massey(m) => budget_in_massey(m),
        _ => None,
    }
}

fn budget_in_schema(e: &SchemaError) -> Option<BudgetExceeded> {
    match e {
        SchemaError::Budget(b) => Some(b.clone()),
        SchemaError::Cohomology(c) => budget_in_cohomology(c),
        SchemaError::Unipotent(u) => budget_in_unipotent(u),
        _ => None,
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> CliError {
        match budget_in_schema(&e) {
            Some(b) => CliError::Budget(b),
            None => CliError::Input(e.to_string()),
        }
    }
}

impl From<CohomologyError> for CliError {
    fn from(e: CohomologyError) -> CliError {
        match budget_in_cohomology(&e) {
            Some(b) => CliError::Budget(b),
            None => CliError::Input(e.to_string()),
        }
    }
}

impl From<MasseyError> for CliError {
    fn from(e: MasseyError) -> CliError {
        match budget_in_massey(&e) {
            Some(b) => CliError::Budget(b),
            None => CliError::Input(e.to_string()),
        }
    }
}

impl From<EmbedError> for CliError {
    fn from(e: EmbedError) -> CliError {
        match budget_in_embed(&e) {
            Some(b) => CliError::Budget(b),
            None => CliError::Input(e.to_string()),
        }
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> CliError {
        CliError::Input(e.to_string())
    }
}

#[derive(Serialize)]
struct Envelope<R: Serialize> {
    version: u32,
    command: &'static str,
    report: R,
}

#[derive(Serialize)]
struct GroupInfoReport {
    order: usize,
    exponent: u64,
    abelian: bool,
    generators: Vec<u32>,
    cyclic_subgroups: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Serialize)]
struct CohomologyReport {
    p: u32,
    degree: usize,
    module: String,
    dim_cocycles: usize,
    dim_coboundaries: usize,
    dim_cohomology: usize,
}

#[derive(Serialize)]
struct CupReport {
    p: u32,
    chars: Vec<String>,
    class_is_zero: bool,
    product: CochainFile,
}

#[derive(Serialize)]
struct CosetReport {
    particular: CochainFile,
    indeterminacy_basis: Vec<CochainFile>,
    system: BTreeMap<String, CochainFile>,
}

#[derive(Serialize)]
struct MasseyReport {
    p: u32,
    n: usize,
    chars: Vec<String>,
    defined: bool,
    contains_zero: Option<bool>,
    witness_kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    coset: Option<CosetReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    obstruction: Option<ObstructionReport>,
}

#[derive(Serialize)]
struct ObstructionReport {
    pair: (usize, usize),
    class: CochainFile,
}

#[derive(Serialize)]
struct HomReport {
    generators: Vec<u32>,
    images: Vec<u32>,
}

#[derive(Serialize)]
struct DwyerReport {
    p: u32,
    n: usize,
    chars: Vec<String>,
    strategy: &'static str,
    defined: bool,
    contains_zero: bool,
    witness_kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    system: Option<BTreeMap<String, CochainFile>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lift: Option<HomReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    obstruction: Option<ObstructionReport>,
}

#[derive(Serialize)]
struct EmbedReport {
    p: u32,
    group_order: usize,
    extension: String,
    alpha: HomReport,
    solvable: bool,
    obstruction_is_zero: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<HomReport>,
    direct_search_agrees: bool,
}

#[derive(Serialize)]
struct HstarReport {
    p: u32,
    module: String,
    dimension: usize,
    basis: Vec<CochainFile>,
}

#[derive(Serialize)]
struct LocalGlobalCliReport {
    p: u32,
    chars: Vec<String>,
    subgroups: Vec<Vec<u32>>,
    restriction_injective: bool,
    local_solvable: Vec<bool>,
    implied_solvable: Option<bool>,
    direct_lift_exists: bool,
    consistent: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lift: Option<HomReport>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let budget = match cli.budget {
        Some(cells) => Budget::with_space_cells(cells),
        None => Budget::default(),
    };
    match run(&cli.command, &budget, cli.format) {
        Ok(Outcome::Computed) => ExitCode::SUCCESS,
        Ok(Outcome::Negative) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: &Command, budget: &Budget, format: Format) -> Result<Outcome, CliError> {
    match command {
        Command::GroupInfo { group } => {
            let realized = load_group(&group.group, budget)?.1;
            let g = &realized.group;
            let report = GroupInfoReport {
                order: g.order(),
                exponent: g.exponent(),
                abelian: g.is_abelian(),
                generators: g.generators().to_vec(),
                cyclic_subgroups: g.cyclic_subgroups().len(),
                labels: g.labels().map(<[String]>::to_vec),
            };
            emit(command.name(), &report, format, |r, out| {
                writeln!(out, "order: {}", r.order).unwrap();
                writeln!(out, "exponent: {}", r.exponent).unwrap();
                writeln!(out, "abelian: {}", r.abelian).unwrap();
                writeln!(out, "generators: {:?}", r.generators).unwrap();
                writeln!(out, "cyclic subgroups: {}", r.cyclic_subgroups).unwrap();
            });
            Ok(Outcome::Computed)
        }
        Command::Cohomology { group, coeff, n, module } => {
            let realized = load_group(&group.group, budget)?.1;
            let p = prime(coeff.p)?;
            let spec = ModuleSpec::parse(module)?;
            let m = spec.build(&realized, p)?;
            let dim_z = cocycle_space(&m, *n, budget)?.len();
            let dim_b = coboundary_space(&m, *n, budget)?.len();
            let report = CohomologyReport {
                p: coeff.p,
                degree: *n,
                module: module.clone(),
                dim_cocycles: dim_z,
                dim_coboundaries: dim_b,
                dim_cohomology: dim_z - dim_b,
            };
            emit(command.name(), &report, format, |r, out| {
                writeln!(out, "dim Z^{}: {}", r.degree, r.dim_cocycles).unwrap();
                writeln!(out, "dim B^{}: {}", r.degree, r.dim_coboundaries).unwrap();
                writeln!(out, "dim H^{}: {}", r.degree, r.dim_cohomology).unwrap();
            });
            Ok(Outcome::Computed)
        }
        Command::Cup { group, coeff, chars } => {
            let (file, realized) = load_group(&group.group, budget)?;
            let p = prime(coeff.p)?;
            let names = split_names(chars, 2)?;
            let module = GModule::trivial(Arc::clone(&realized.group), p, 1);
            let left = character_class(&file, &names[0], &module, budget)?;
            let right = character_class(&file, &names[1], &module, budget)?;
            let product =
                left.representative().cup(right.representative(), budget)?;
            let class = CohomClass::new(product, budget)?;
            let report = CupReport {
                p: coeff.p,
                chars: names,
                class_is_zero: class.is_zero_class(budget)?,
                product: encode_cochain(class.representative()),
            };
            emit(command.name(), &report, format, |r, out| {
                writeln!(out, "cup of {} and {}", r.chars[0], r.chars[1]).unwrap();
                writeln!(out, "class is zero: {}", r.class_is_zero).unwrap();
                writeln!(out, "nonzero table entries: {}", r.product.entries.len())
                    .unwrap();
            });
            Ok(Outcome::Computed)
        }
        Command::Massey { group, coeff, chars } => {
            let (file, realized) = load_group(&group.group, budget)?;
            let p = prime(coeff.p)?;
            let names = split_names(chars, 0)?;
            if names.len() < 3 {
                return Err(CliError::Input(format!(
                    "massey needs at least three characters, got {}",
                    names.len()
                )));
            }
            let module = GModule::trivial(Arc::clone(&realized.group), p, 1);
            let inputs = names
                .iter()
                .map(|name| character_class(&file, name, &module, budget))
                .collect::<Result<Vec<_>, _>>()?;
            let report = if names.len() == 3 {
                match triple_massey(&inputs, budget)? {
                    TripleProduct::Undefined { pair, cup } => MasseyReport {
                        p: coeff.p,
                        n: 3,
                        chars: names,
                        defined: false,
                        contains_zero: None,
                        witness_kind: "obstruction",
                        coset: None,
                        obstruction: Some(ObstructionReport {
                            pair,
                            class: encode_cochain(cup.representative()),
                        }),
                    },
                    TripleProduct::Defined(coset) => {
                        let zero = contains_zero(&coset, budget)?;
                        MasseyReport {
                            p: coeff.p,
                            n: 3,
                            chars: names,
                            defined: true,
                            contains_zero: Some(zero),
                            witness_kind: "coset",
                            coset: Some(CosetReport {
                                particular: encode_cochain(coset.particular.representative()),
                                indeterminacy_basis: coset
                                    .indeterminacy_basis
                                    .iter()
                                    .map(|c| encode_cochain(c.representative()))
                                    .collect(),
                                system: system_entries(&coset.system),
                            }),
                            obstruction: None,
                        }
                    }
                }
            } else {
                match nfold_vanishes(&inputs, Strategy::Enumerate, budget)? {
                    NfoldVerdict::Undefined { obstruction } => MasseyReport {
                        p: coeff.p,
                        n: names.len(),
                        chars: names,
                        defined: false,
                        contains_zero: None,
                        witness_kind: "obstruction",
                        coset: None,
                        obstruction: obstruction.map(|(i, j, class)| ObstructionReport {
                            pair: (i, j),
                            class: encode_cochain(class.representative()),
                        }),
                    },
                    NfoldVerdict::ContainsZero { system, .. } => MasseyReport {
                        p: coeff.p,
                        n: names.len(),
                        chars: names,
                        defined: true,
                        contains_zero: Some(true),
                        witness_kind: "defining_system",
                        coset: Some(CosetReport {
                            particular: encode_cochain(
                                system.value(budget)?.representative(),
                            ),
                            indeterminacy_basis: Vec::new(),
                            system: system_entries(&system),
                        }),
                        obstruction: None,
                    },
                    NfoldVerdict::DefinedNotVanishing { system } => MasseyReport {
                        p: coeff.p,
                        n: names.len(),
                        chars: names,
                        defined: true,
                        contains_zero: Some(false),
                        witness_kind: "defining_system",
                        coset: Some(CosetReport {
                            particular: encode_cochain(
                                system.value(budget)?.representative(),
                            ),
                            indeterminacy_basis: Vec::new(),
                            system: system_entries(&system),
                        }),
                        obstruction: None,
                    },
                }
            };
            let negative = !report.defined;
            emit(command.name(), &report, format, |r, out| {
                writeln!(out, "defined: {}", r.defined).unwrap();
                if let Some(z) = r.contains_zero {
                    writeln!(out, "contains zero: {z}").unwrap();
                }
                if let Some(c) = &r.coset {
                    writeln!(out, "indeterminacy dimension: {}", c.indeterminacy_basis.len())
                        .unwrap();
                }
            });
            Ok(if negative { Outcome::Negative } else { Outcome::Computed })
        }
        Command::Dwyer { group, coeff, chars, strategy } => {
            let (file, realized) = load_group(&group.group, budget)?;
            let p = prime(coeff.p)?;
            let names = split_names(chars, 0)?;
            if names.len() < 2 {
                return Err(CliError::Input(format!(
                    "dwyer needs at least two characters, got {}",
                    names.len()
                )));
            }
            let module = GModule::trivial(Arc::clone(&realized.group), p, 1);
            let inputs = names
                .iter()
                .map(|name| character_class(&file, name, &module, budget))
                .collect::<Result<Vec<_>, _>>()?;
            let (strategy, strategy_name) = match strategy {
                StrategyArg::Enumerate => (Strategy::Enumerate, "enumerate"),
                StrategyArg::Dwyer => (Strategy::Dwyer, "dwyer"),
            };
            let verdict = nfold_vanishes(&inputs, strategy, budget)?;
            let report = match verdict {
                NfoldVerdict::Undefined { obstruction } => DwyerReport {
                    p: coeff.p,
                    n: names.len(),
                    chars: names,
                    strategy: strategy_name,
                    defined: false,
                    contains_zero: false,
                    witness_kind: "obstruction",
                    system: None,
                    lift: None,
                    obstruction: obstruction.map(|(i, j, class)| ObstructionReport {
                        pair: (i, j),
                        class: encode_cochain(class.representative()),
                    }),
                },
                NfoldVerdict::ContainsZero { system, lift } => DwyerReport {
                    p: coeff.p,
                    n: names.len(),
                    chars: names,
                    strategy: strategy_name,
                    defined: true,
                    contains_zero: true,
                    witness_kind: if lift.is_some() {
                        "defining_system_with_lift"
                    } else {
                        "defining_system"
                    },
                    system: Some(system_entries(&system)),
                    lift: lift.map(|h| hom_report(&h)),
                    obstruction: None,
                },
                NfoldVerdict::DefinedNotVanishing { system } => DwyerReport {
                    p: coeff.p,
                    n: names.len(),
                    chars: names,
                    strategy: strategy_name,
                    defined: true,
                    contains_zero: false,
                    witness_kind: "defining_system",
                    system: Some(system_entries(&system)),
                    lift: None,
                    obstruction: None,
                },
            };
            let negative = !(report.defined && report.contains_zero);
            emit(command.name(), &report, format, |r, out| {
                writeln!(out, "strategy: {}", r.strategy).unwrap();
                writeln!(out, "defined: {}", r.defined).unwrap();
                writeln!(out, "contains zero: {}", r.contains_zero).unwrap();
                writeln!(out, "witness: {}", r.witness_kind).unwrap();
            });
            Ok(if negative { Outcome::Negative } else { Outcome::Computed })
        }
        Command::Embed { group, coeff, alpha, extension, size } => {
            let realized = load_group(&group.group, budget)?.1;
            let g = Arc::clone(&realized.group);
            let (ext, ext_name) = match extension {
                ExtensionArg::Superdiagonal => (
                    superdiagonal_extension(coeff.p, budget)?,
                    format!("superdiagonal U_4(F_{})", coeff.p),
                ),
                ExtensionArg::Center => (
                    center_extension(*size, coeff.p, budget)?,
                    format!("center U_{}(F_{})", size, coeff.p),
                ),
            };
            let images = parse_indices(alpha)?;
            let gens = g.generators();
            if images.len() != gens.len() {
                return Err(CliError::Input(format!(
                    "alpha gives {} images, group has {} generators",
                    images.len(),
                    gens.len()
                )));
            }
            let alpha_hom = GroupHom::from_generator_images(
                Arc::clone(&g),
                Arc::clone(ext.quotient()),
                gens,
                &images,
            )?;
            let problem = WeakEmbeddingProblem::new(alpha_hom.clone(), ext)?;
            let hoechsmann = problem.hoechsmann_solvable(budget)?;
            let direct = problem.direct_weak_solution(budget)?;
            let report = EmbedReport {
                p: coeff.p,
                group_order: g.order(),
                extension: ext_name,
                alpha: hom_report(&alpha_hom),
                solvable: hoechsmann.solvable,
                obstruction_is_zero: hoechsmann
                    .obstruction
                    .pulled_back
                    .is_zero_class(budget)?,
                witness: hoechsmann.witness.as_ref().map(hom_report),
                direct_search_agrees: hoechsmann.solvable == direct.is_some(),
            };
            let negative = !report.solvable;
            emit(command.name(), &report, format, |r, out| {
                writeln!(out, "extension: {}", r.extension).unwrap();
                writeln!(out, "solvable: {}", r.solvable).unwrap();
                writeln!(out, "direct search agrees: {}", r.direct_search_agrees).unwrap();
            });
            Ok(if negative { Outcome::Negative } else { Outcome::Computed })
        }
        Command::Hstar { group, coeff, module } => {
            let realized = load_group(&group.group, budget)?.1;
            let p = prime(coeff.p)?;
            let spec = ModuleSpec::parse(module)?;
            let m = spec.build(&realized, p)?;
            let classes = h1_star(&m, budget)?;
            let report = HstarReport {
                p: coeff.p,
                module: module.clone(),
                dimension: classes.len(),
                basis: classes
                    .iter()
                    .map(|c| encode_cochain(c.representative()))
                    .collect(),
            };
            emit(command.name(), &report, format, |r, out| {
                writeln!(out, "dimension: {}", r.dimension).unwrap();
            });
            Ok(Outcome::Computed)
        }
        Command::LocalGlobal { group, coeff, chars, subgroups } => {
            let (file, realized) = load_group(&group.group, budget)?;
            let p = prime(coeff.p)?;
            let names = split_names(chars, 3)?;
            let module = GModule::trivial(Arc::clone(&realized.group), p, 1);
            let inputs = names
                .iter()
                .map(|name| character_class(&file, name, &module, budget))
                .collect::<Result<Vec<_>, _>>()?;
            let subs = parse_subgroups(&realized.group, subgroups)?;
            let sub_members: Vec<Vec<u32>> =
                subs.iter().map(|s| s.members().to_vec()).collect();
            let outcome = local_global_vanishing(&inputs, &subs, budget)?;
            let report = LocalGlobalCliReport {
                p: coeff.p,
                chars: names,
                subgroups: sub_members,
                restriction_injective: outcome.restriction_injective,
                local_solvable: outcome.local_solvable.clone(),
                implied_solvable: outcome.implied_solvable,
                direct_lift_exists: outcome.direct_lift.is_some(),
                consistent: outcome.consistent,
                lift: outcome.direct_lift.as_ref().map(hom_report),
            };
            emit(command.name(), &report, format, |r, out| {
                writeln!(out, "restriction injective: {}", r.restriction_injective)
                    .unwrap();
                writeln!(out, "local solvable: {:?}", r.local_solvable).unwrap();
                writeln!(out, "direct lift exists: {}", r.direct_lift_exists).unwrap();
                if let Some(c) = r.consistent {
                    writeln!(out, "consistent: {c}").unwrap();
                }
            });
            Ok(Outcome::Computed)
        }
    }
}

fn load_group(path: &PathBuf, budget: &Budget) -> Result<(GroupFile, RealizedGroup), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let file = GroupFile::parse(&text)?;
    let realized = realize_group(&file.group, budget)?;
    Ok((file, realized))
}

fn prime(p: u32) -> Result<Prime, CliError> {
    Prime::new(p).map_err(|e| CliError::Input(e.to_string()))
}

fn split_names(spec: &str, expected: usize) -> Result<Vec<String>, CliError> {
    let names: Vec<String> = spec.split(',').map(|s| s.trim().to_owned()).collect();
    if names.iter().any(String::is_empty) {
        return Err(CliError::Input(format!("empty character name in {spec:?}")));
    }
    if expected != 0 && names.len() != expected {
        return Err(CliError::Input(format!(
            "expected {expected} character names, got {}",
            names.len()
        )));
    }
    Ok(names)
}

fn parse_indices(spec: &str) -> Result<Vec<u32>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Input(format!("bad element index {s:?}")))
        })
        .collect()
}

fn parse_subgroups(
    group: &Arc<FiniteGroup>,
    spec: &str,
) -> Result<Vec<Subgroup>, CliError> {
    match spec {
        "cyclic" => Ok(group.cyclic_subgroups()),
        "whole" => {
            let all: Vec<u32> = (0..group.order() as u32).collect();
            Ok(vec![group.subgroup(&all)?])
        }
        _ => spec
            .split(';')
            .map(|part| {
                let gens = parse_indices(part)?;
                Ok(group.generated_subgroup(&gens)?)
            })
            .collect(),
    }
}

fn system_entries(system: &DefiningSystem) -> BTreeMap<String, CochainFile> {
    system
        .entries()
        .iter()
        .map(|(&(i, j), cochain)| (format!("a_{i}_{j}"), encode_cochain(cochain)))
        .collect()
}

fn hom_report(hom: &GroupHom) -> HomReport {
    let gens = hom.source().generators().to_vec();
    let images = gens.iter().map(|&g| hom.apply(g)).collect();
    HomReport { generators: gens, images }
}

fn emit<R: Serialize>(
    command: &'static str,
    report: &R,
    format: Format,
    text: impl Fn(&R, &mut String),
) {
    use std::io::Write as _;
    let body = match format {
        Format::Json => {
            let envelope = Envelope { version: FORMAT_VERSION, command, report };
            let mut body =
                serde_json::to_string_pretty(&envelope).expect("report serializes");
            body.push('\n');
            body
        }
        Format::Text => {
            let mut out = String::new();
            text(report, &mut out);
            out
        }
    };
    // A closed pipe downstream is not our error; stop writing quietly.
    let _ = std::io::stdout().lock().write_all(body.as_bytes());
}

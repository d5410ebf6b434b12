use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "trl", version, about = "Exact analytic rank, partition rank and Gowers norm computations over small finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Append wall-clock timings to the report.
    #[arg(long, global = true)]
    pub timings: bool,
    /// Seed for the random ensembles.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// Input file, or `-` for stdin.
    #[arg(short = 'i', long = "input")]
    pub input: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct Character {
    /// Code of the field element `c` selecting the character `x -> omega^{Tr(cx)}`.
    #[arg(long = "char", default_value_t = 1)]
    pub char_code: u32,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact bias of a tensor.
    BiasTensor {
        #[command(flatten)]
        input: Input,
        /// Also enumerate all d inputs and check every nontrivial character.
        #[arg(long)]
        exact: bool,
    },
    /// Analytic rank of a tensor.
    Arank {
        #[command(flatten)]
        input: Input,
    },
    /// Partition rank bounds with a certificate.
    Prank {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Write the certificate here.
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
    /// Value histogram and bias of a polynomial phase.
    BiasPoly {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        character: Character,
    },
    /// Gowers U^k norm of a polynomial phase.
    Gowers {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        order: usize,
        #[command(flatten)]
        character: Character,
    },
    /// The order-d derivative tensor of a polynomial.
    DeriveTensor {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
    /// P = (1/d!) T(x,..,x) + W with deg W < d.
    Taylor {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
    /// Best correlating polynomial of bounded degree.
    Correlate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        max_degree: u32,
        #[command(flatten)]
        character: Character,
    },
    /// Checks that P is a function of the given polynomials.
    RankCheck {
        #[command(flatten)]
        input: Input,
        /// Polynomial files Q_1, ..., Q_r.
        #[arg(long = "with")]
        with: Vec<PathBuf>,
    },
    /// Bogolyubov subspace of a dense set with verified witnesses.
    Bogolyubov {
        #[command(flatten)]
        input: Input,
        /// Density parameter; defaults to the density of the set.
        #[arg(long)]
        delta: Option<String>,
    },
    /// l-system with sumset certificates inside a dense product multiset.
    FindSystem {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        delta: String,
        #[arg(long, default_value = "1/8")]
        min_delta: String,
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
    /// l-system operations.
    Lsystem {
        #[command(subcommand)]
        op: LsystemOp,
    },
    /// Decides whether a multiset is (k, alpha)-forcing for given subspaces.
    ForcingCheck {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value = "1")]
        alpha: String,
    },
    /// Symbolic tower-type bound.
    TowerBound {
        #[arg(long)]
        theorem: String,
        #[arg(short = 'd', default_value_t = 3)]
        d: u32,
        /// Parameter of the bound (r, epsilon, c or delta).
        #[arg(short = 'r', long = "param", default_value = "1")]
        param: String,
        #[arg(long = "q", default_value_t = 2)]
        q: u32,
    },
    /// Seeded random instances with per-instance metrics.
    Ensemble(EnsembleArgs),
    /// Runs the built-in acceptance checks.
    Selftest,
}

#[derive(Subcommand, Debug)]
pub enum LsystemOp {
    Validate {
        #[command(flatten)]
        input: Input,
    },
    Intersect {
        /// The two systems.
        #[arg(short = 'i', long = "input", num_args = 2, required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
    Restrict {
        #[command(flatten)]
        input: Input,
        /// Constraint subspaces L_I.
        #[arg(long)]
        constraints: PathBuf,
        #[arg(long)]
        artifact: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnsembleKind {
    RandomTensor,
    RandomPoly,
    Degenerate,
    ProductMultiset,
}

#[derive(Args, Debug, Clone)]
pub struct EnsembleArgs {
    #[arg(value_enum)]
    pub kind: EnsembleKind,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long = "q", default_value_t = 2)]
    pub q: u32,
    /// Comma-separated mode dimensions.
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    pub dims: Vec<usize>,
    /// Polynomial degree (random-poly).
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    #[arg(long, default_value_t = 2)]
    pub nvars: usize,
    /// Subspace dimension bound (degenerate).
    #[arg(short = 'k', default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 100_000)]
    pub budget: u64,
    /// Density parameter (product-multiset).
    #[arg(long, default_value = "1/4")]
    pub delta: String,
    /// Probability of keeping each tuple (product-multiset).
    #[arg(long, default_value = "1/2")]
    pub keep: String,
}

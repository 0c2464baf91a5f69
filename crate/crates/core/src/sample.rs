//! Seeded synthetic quantitative-finance corpus used for demos and end-to-end runs.
//!
//! Each document belongs to one of the nine q-fin categories and draws most of
//! its content words from that category's theme list, so planted structure is
//! recoverable. Texts end with a reference list carrying author surnames and
//! journal names for the entity miner.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::harvest::{assign_reference_category, CategoryCode, DocumentRecord, HarvestError, QFIN_CATEGORIES};

pub const DEFAULT_SAMPLE_DOCS: usize = 200;
pub const DEFAULT_SAMPLE_SEED: u64 = 7;

const THEMES: [(&str, &[&str]); 9] = [
    ("CP", &[
        "monte carlo", "simulation", "numerical scheme", "discretization", "finite difference", "convergence",
        "algorithm", "grid", "solver", "parallel computing", "neural network", "approximation", "quadrature",
        "variance reduction", "computational cost", "iteration", "mesh", "sampling",
    ]),
    ("EC", &[
        "inflation", "monetary policy", "economic growth", "unemployment", "wage", "household", "consumption",
        "fiscal policy", "central bank", "labor market", "welfare", "productivity", "trade", "income inequality",
        "business cycle", "taxation", "government", "demand",
    ]),
    ("GN", &[
        "corporate governance", "bank", "lending", "credit", "firm", "investor", "dividend", "ownership",
        "capital structure", "financial crisis", "regulation", "shareholder", "leverage", "accounting", "funding",
        "venture capital", "disclosure", "merger",
    ]),
    ("MF", &[
        "stochastic volatility", "martingale", "brownian motion", "hedging", "probability measure", "arbitrage",
        "utility maximization", "stochastic control", "semimartingale", "filtration", "duality", "viscosity solution",
        "optimal stopping", "diffusion", "jump process", "stochastic integral", "equilibrium", "convex",
    ]),
    ("PM", &[
        "portfolio", "asset allocation", "diversification", "mean variance", "rebalancing", "sharpe ratio",
        "factor model", "covariance matrix", "benchmark", "fund manager", "expected return", "robust optimization",
        "transaction costs", "index tracking", "estimation error", "shrinkage", "weights", "investment horizon",
    ]),
    ("PR", &[
        "option pricing", "implied volatility", "strike", "maturity", "derivative", "barrier option", "payoff",
        "call option", "put option", "pricing formula", "volatility surface", "interest rate", "bond", "swaption",
        "calibration", "exotic", "closed form", "risk neutral",
    ]),
    ("RM", &[
        "value at risk", "expected shortfall", "tail risk", "default", "copula", "stress testing", "capital requirement",
        "systemic risk", "credit risk", "loss distribution", "risk measure", "backtesting", "insurance", "solvency",
        "contagion", "exposure", "counterparty", "extreme value",
    ]),
    ("ST", &[
        "returns", "heavy tails", "autocorrelation", "garch", "time series", "cross correlation", "scaling",
        "power law", "volatility clustering", "stylized facts", "entropy", "random matrix", "multifractal",
        "econophysics", "stock index", "long memory", "fluctuations", "regime",
    ]),
    ("TR", &[
        "limit order book", "liquidity", "market maker", "bid ask spread", "execution", "order flow", "tick size",
        "high frequency", "price impact", "trading strategy", "market microstructure", "latency", "exchange",
        "order placement", "inventory", "auction", "trader", "volume",
    ]),
];

const GENERIC: &[&str] = &[
    "model", "approach", "method", "result", "framework", "analysis", "evidence", "estimate", "data", "sample",
    "parameter", "structure", "property", "effect", "distribution", "setting", "problem", "question", "behaviour",
    "performance", "literature", "application", "variable", "process", "market", "price", "value", "risk",
];

const TEMPLATES: &[&str] = &[
    "In this work we study the {T} of the {G} and show that the {T} is closely related to the {G}.",
    "We propose a new {G} for the {T} which improves on the classical {T}.",
    "Our main {G} shows how the {T} affects the {T} under realistic assumptions.",
    "The {T} plays a central role in the {G}, and we analyse it together with the {T}.",
    "Empirical {G} from several markets confirms that the {T} depends on the {T}.",
    "We compare the {T} with the {G} and find that the {T} remains stable over time.",
    "A simple {G} for the {T} is derived, and its {G} is discussed in detail.",
    "These findings suggest that the {T} should be taken into account when the {T} is studied.",
    "Finally, we illustrate the {G} with an example based on the {T} and the {T}.",
    "The {G} of the {T} is estimated using a large {G} of observations.",
];

const SURNAMES: &[&str] = &[
    "Smith", "Black", "Scholes", "Heston", "Fama", "Engle", "Bollerslev", "Cont", "Bouchaud", "Gatheral", "Carr",
    "Madan", "Duffie", "Kyle", "Avellaneda", "Campbell", "Shiller", "Sharpe", "Hull", "Vasicek", "Cox", "Schweizer",
    "Delbaen", "McNeil", "Mandelbrot", "Mantegna", "Stanley", "Rogers", "Protter", "Pham", "Touzi", "Kallsen",
    "Guasoni", "Obizhaeva", "Gueant", "Lehalle", "Rosenbaum", "Bacry", "Jaisson", "Farmer",
];

const JOURNALS: &[&str] = &[
    "Journal of Finance", "Mathematical Finance", "Quantitative Finance", "Finance and Stochastics",
    "Review of Financial Studies", "Journal of Financial Economics", "Physica A", "Econometrica",
    "Journal of Econometrics", "Journal of Banking and Finance", "Applied Mathematical Finance",
    "SIAM Journal on Financial Mathematics",
];

const CROSS_LISTS: &[&str] = &["stat.ML", "math.PR", "econ.EM", "cs.LG", "stat.ME"];

/// Records plus one plain-text body per record id.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCorpus {
    pub records: Vec<DocumentRecord>,
    pub texts: BTreeMap<String, String>,
}

fn fill(template: &str, theme: &[&str], rng: &mut ChaCha8Rng) -> String {
    let mut out = String::with_capacity(template.len() + 40);
    let mut rest = template;
    while let Some(at) = rest.find('{') {
        out.push_str(&rest[..at]);
        let slot = &rest[at + 1..at + 2];
        let draw: f64 = rng.random();
        let word = match slot {
            "T" if draw < 0.65 => theme.choose(rng).unwrap(),
            // vocabulary of a neighbouring field
            "T" if draw < 0.85 => THEMES.choose(rng).unwrap().1.choose(rng).unwrap(),
            _ => GENERIC.choose(rng).unwrap(),
        };
        out.push_str(word);
        rest = &rest[at + 3..];
    }
    out.push_str(rest);
    out
}

fn paragraph(theme: &[&str], sentences: usize, rng: &mut ChaCha8Rng) -> String {
    (0..sentences)
        .map(|_| fill(TEMPLATES.choose(rng).unwrap(), theme, rng))
        .collect::<Vec<_>>()
        .join(" ")
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map_or_else(String::new, |f| f.to_uppercase().chain(c).collect())
}

fn initial(rng: &mut ChaCha8Rng) -> char {
    (b'A' + rng.random_range(0..26u8)) as char
}

fn reference(theme: &[&str], rng: &mut ChaCha8Rng, n: usize) -> String {
    let authors: Vec<String> = (0..rng.random_range(1..=3))
        .map(|_| format!("{}, {}.", SURNAMES.choose(rng).unwrap(), initial(rng)))
        .collect();
    let names = match authors.len() {
        1 => authors[0].clone(),
        _ => format!("{} and {}", authors[..authors.len() - 1].join(", "), authors[authors.len() - 1]),
    };
    format!(
        "[{n}] {names} ({}). On the {} and the {}. {}, {}, {}-{}.",
        rng.random_range(1970..2021),
        theme.choose(rng).unwrap(),
        theme.choose(rng).unwrap(),
        JOURNALS.choose(rng).unwrap(),
        rng.random_range(1..60),
        rng.random_range(1..200),
        rng.random_range(200..400),
    )
}

pub fn generate_sample(n_docs: usize, seed: u64) -> SampleCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n_docs);
    let mut texts = BTreeMap::new();
    for i in 0..n_docs {
        let (code, theme) = THEMES[i % THEMES.len()];
        // later years get more documents
        let year = 2000 + (rng.random_range(0.0f64..1.0).sqrt() * 21.0) as i32;
        let id = format!("{:02}{:02}.{:05}", year % 100, rng.random_range(1..13), i + 1);
        let mut categories = vec![CategoryCode::parse(&format!("q-fin.{code}")).unwrap()];
        if rng.random_bool(0.3) {
            categories.insert(0, CategoryCode::parse(CROSS_LISTS.choose(&mut rng).unwrap()).unwrap());
        }
        if rng.random_bool(0.2) {
            let c = CategoryCode::parse(QFIN_CATEGORIES.choose(&mut rng).unwrap()).unwrap();
            if !categories.contains(&c) {
                categories.push(c);
            }
        }
        let title = capitalize(&format!(
            "{} and {} in {}",
            theme.choose(&mut rng).unwrap(),
            theme.choose(&mut rng).unwrap(),
            GENERIC.choose(&mut rng).unwrap()
        ));
        let authors: Vec<String> = (0..rng.random_range(1..=3))
            .map(|_| format!("{}. {}", initial(&mut rng), SURNAMES.choose(&mut rng).unwrap()))
            .collect();
        let abstract_text = paragraph(theme, 4, &mut rng);

        let mut body = format!("{title}\n\nAbstract\n{abstract_text}\n\n1. Introduction\n");
        for _ in 0..rng.random_range(4..8) {
            body.push_str(&paragraph(theme, rng.random_range(4..8), &mut rng));
            body.push_str("\n\n");
        }
        let (a, b) = (SURNAMES.choose(&mut rng).unwrap(), SURNAMES.choose(&mut rng).unwrap());
        body.push_str(&format!(
            "This extends the work of {a} and {b} ({}) and of {} et al. on the {}.\n\nReferences\n",
            rng.random_range(1990..2020),
            SURNAMES.choose(&mut rng).unwrap(),
            theme.choose(&mut rng).unwrap(),
        ));
        for n in 1..=rng.random_range(4..9) {
            body.push_str(&reference(theme, &mut rng, n));
            body.push('\n');
        }

        records.push(DocumentRecord {
            id: id.clone(),
            title,
            authors,
            reference_category: assign_reference_category(&categories),
            all_categories: categories,
            year,
            abstract_text,
            doi: None,
            updated: None,
        });
        texts.insert(id, body);
    }
    records.sort_by(|a, b| a.id.cmp(&b.id));
    SampleCorpus { records, texts }
}

/// Writes `records.ndjson` and `texts/<id>.txt` under `dir`.
pub fn write_sample(sample: &SampleCorpus, dir: &Path) -> Result<(), HarvestError> {
    let text_dir = dir.join("texts");
    fs::create_dir_all(&text_dir)?;
    let mut out = fs::File::create(dir.join("records.ndjson"))?;
    for r in &sample.records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    for (id, text) in &sample.texts {
        fs::write(text_dir.join(format!("{id}.txt")), text)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_labelled() {
        let a = generate_sample(30, 3);
        assert_eq!(a, generate_sample(30, 3));
        assert_ne!(a, generate_sample(30, 4));
        assert_eq!(a.records.len(), 30);
        assert!(a.records.windows(2).all(|w| w[0].id < w[1].id));
        for r in &a.records {
            assert!(r.reference_category.as_ref().unwrap().domain() == "q-fin");
            assert!(a.texts[&r.id].contains("References\n[1] "));
            assert!((2000..=2020).contains(&r.year));
        }
    }
}

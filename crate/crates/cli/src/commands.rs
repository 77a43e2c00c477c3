use std::fmt;
use std::fs;

use cantor_core::bratteli::{parse_diagram, system_digest, ClopenSet, OrderedBratteliDiagram, Successor};
use cantor_core::certificate::{Certificate, Claim, TauWitness};
use cantor_core::classify::{
    conjugate_at_resolution, decide_k_conjugacy, decide_tau, decide_weak, frobenius, represent, Bounds, KVerdict,
    TauVerdict, WeakVerdict,
};
use cantor_core::dimgroup::{DgElement, DimGroup};
use cantor_core::invariants::{divisor_witness, periodic_spectrum, PrimeValuation, Valuation};
use cantor_core::Error;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::report::render;
use crate::{Command, Format, Opts};

pub enum CliError {
    Input(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_capability() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(s) => f.write_str(s),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn bounds(o: &Opts) -> Bounds {
    Bounds {
        depth: o.depth as usize,
        prime_cutoff: o.primes,
        valuation_cutoff: Bounds::default().valuation_cutoff,
        ladder_span: o.span as usize,
        max_level: o.max_level as usize,
    }
}

fn load(path: &str) -> Result<OrderedBratteliDiagram> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))?;
    parse_diagram(&text).map_err(|e| match e {
        e if e.is_capability() => CliError::Core(e),
        e => CliError::Input(format!("{path}: {e}")),
    })
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialise")
}

struct Report {
    fields: Map<String, Value>,
    certificate: Option<Certificate>,
}

impl Report {
    fn new(command: &str, o: &Opts) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), command.into());
        fields.insert("bounds".into(), to_value(&bounds(o)));
        Report { fields, certificate: None }
    }

    fn set(&mut self, k: &str, v: impl Into<Value>) -> &mut Self {
        self.fields.insert(k.into(), v.into());
        self
    }

    fn certify<W: Serialize>(&mut self, claim: Claim, systems: &[&OrderedBratteliDiagram], w: &W) -> Result<()> {
        let cert = Certificate::issue(claim, systems, w)?;
        self.set("claim", claim.name());
        self.certificate = Some(cert);
        Ok(())
    }

    fn emit(self, o: &Opts) -> Result<()> {
        let mut fields = self.fields;
        if let Some(cert) = &self.certificate {
            match &o.out {
                Some(path) => {
                    fs::write(path, cert.to_json()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                    fields.insert("certificate".into(), path.display().to_string().into());
                }
                None if o.format == Format::Json => {
                    let v: Value = serde_json::from_str(&cert.to_json()).expect("certificates are JSON");
                    fields.insert("certificate".into(), v);
                }
                None => {
                    fields.insert("certificate".into(), cert.witness_digest.clone().into());
                }
            }
        }
        print!("{}", render(&fields, o.format));
        Ok(())
    }
}

fn spectrum_map(entries: &[PrimeValuation]) -> Value {
    let mut m = Map::new();
    for e in entries {
        let v = match &e.valuation {
            Valuation::Infinite(_) => json!("inf"),
            Valuation::Exact { v, .. } => json!(v),
            Valuation::AtLeast(k) => json!(format!(">={k}")),
        };
        m.insert(e.p.to_string(), v);
    }
    Value::Object(m)
}

pub fn run(cmd: &Command, o: &Opts) -> Result<()> {
    let b = bounds(o);
    match cmd {
        Command::Validate { system } => {
            let d = load(system)?;
            let mut r = Report::new("validate", o);
            r.set("system", system_digest(&d))
                .set("kind", to_value(&d.kind()))
                .set("validation", to_value(&d.validate(b.depth)));
            r.emit(o)
        }
        Command::Heights { system, level } => {
            let d = load(system)?;
            let hs: Vec<Vec<String>> = (0..=*level)
                .map(|m| Ok(d.heights(m)?.iter().map(ToString::to_string).collect()))
                .collect::<std::result::Result<_, Error>>()?;
            let mut r = Report::new("heights", o);
            r.set("heights", to_value(&hs));
            r.emit(o)
        }
        Command::K0Class { system, level, tower, floors } => {
            let d = load(system)?;
            let u = ClopenSet::from_floors(&d, *level, *tower, floors)?;
            let class = d.class_of_clopen(&u)?;
            let mut r = Report::new("k0-class", o);
            r.set("class", to_value(&class));
            r.emit(o)
        }
        Command::Positivity { system, level, vector } => {
            let d = load(system)?;
            let dg = DimGroup::new(&d);
            let g = DgElement::from_i64(*level, vector);
            let mut r = Report::new("positivity", o);
            r.set("element", to_value(&g))
                .set("zero", to_value(&dg.is_zero(&g, b.depth)?))
                .set("positivity", to_value(&dg.is_positive(&g, b.depth)?));
            r.emit(o)
        }
        Command::Spectrum { system } => {
            let d = load(system)?;
            let s = periodic_spectrum(&DimGroup::new(&d), &b.spectrum())?;
            let mut r = Report::new("spectrum", o);
            r.set("spectrum", spectrum_map(&s.entries)).set("supernatural", s.to_string());
            r.certify(Claim::Spectrum, &[&d], &s)?;
            r.emit(o)
        }
        Command::Weak { a, b: bp } => {
            let (da, db) = (load(a)?, load(bp)?);
            let (ga, gb) = (DimGroup::new(&da), DimGroup::new(&db));
            let v = decide_weak(&ga, &gb, &b)?;
            let mut r = Report::new("weak", o);
            r.set("verdict", to_value(&v));
            match &v {
                WeakVerdict::WeaklyConjugate { schedule } => r.certify(Claim::Weak, &[&da, &db], schedule)?,
                WeakVerdict::Not { witness: Some(w), .. } => r.certify(Claim::NotWeak, &[&da, &db], w)?,
                _ => {}
            }
            r.emit(o)
        }
        Command::Tau { a, b: bp } => {
            let (da, db) = (load(a)?, load(bp)?);
            let (ga, gb) = (DimGroup::new(&da), DimGroup::new(&db));
            let v = decide_tau(&ga, &gb, &b)?;
            let mut r = Report::new("tau", o);
            r.set("verdict", to_value(&v));
            match &v {
                TauVerdict::TauConjugate { spectrum_a, spectrum_b, .. } => {
                    let w = TauWitness { spectrum_a: spectrum_a.clone(), spectrum_b: spectrum_b.clone() };
                    r.certify(Claim::Tau, &[&da, &db], &w)?
                }
                TauVerdict::Not { n: Some(n), .. } => {
                    if let Some(w) = divisor_witness(&ga, &gb, *n, b.depth)? {
                        r.certify(Claim::NotWeak, &[&da, &db], &w)?
                    }
                }
                _ => {}
            }
            r.emit(o)
        }
        Command::Kconj { a, b: bp } => {
            let (da, db) = (load(a)?, load(bp)?);
            let v = decide_k_conjugacy(&DimGroup::new(&da), &DimGroup::new(&db), &b)?;
            let mut r = Report::new("kconj", o);
            r.set("verdict", to_value(&v));
            match &v {
                KVerdict::KConjugate { ladder } => r.certify(Claim::KConjugate, &[&da, &db], ladder)?,
                KVerdict::Not { obstructions } => r.certify(Claim::NotK, &[&da, &db], obstructions)?,
                KVerdict::Unknown { .. } => {}
            }
            r.emit(o)
        }
        Command::Conjugator { a, b: bp, level } => {
            let (da, db) = (load(a)?, load(bp)?);
            let mut r = Report::new("conjugator", o);
            let res = match conjugate_at_resolution(&da, &db, *level, &b) {
                Ok(res) => res,
                Err(Error::Obstruction { stage, n }) => {
                    r.set("level", *level).set("obstruction", json!({"stage": stage, "n": n}));
                    if let Some(w) = divisor_witness(&DimGroup::new(&da), &DimGroup::new(&db), n, b.depth)? {
                        r.certify(Claim::NotWeak, &[&da, &db], &w)?;
                    }
                    return r.emit(o);
                }
                Err(e) => return Err(e.into()),
            };
            r.set("level", *level)
                .set("target_level", res.sigma.target_level)
                .set("corrector_level", res.corrector.level)
                .set("blocks", res.blocks.len())
                .set("report", to_value(&res.report));
            r.certify(Claim::Conjugator, &[&da, &db], &res)?;
            r.emit(o)
        }
        Command::Verify { certificate } => {
            let text = fs::read_to_string(certificate).map_err(|e| CliError::Input(format!("{certificate}: {e}")))?;
            let mut r = Report::new("verify", o);
            match Certificate::from_json(&text).and_then(|c| c.verify()) {
                Ok(claim) => r.set("claim", claim.name()).set("verified", true),
                Err(e) => r.set("verified", false).set("reason", e.to_string()),
            };
            r.emit(o)
        }
        Command::Vershik { system, level, tower, path, steps } => {
            let d = load(system)?;
            let mut p = match path {
                Some(edges) if edges.len() != *level => {
                    return Err(CliError::Input(format!("path has {} edges but level is {level}", edges.len())))
                }
                Some(edges) => d.path(*tower, edges)?,
                None => d.min_path(*tower, *level)?,
            };
            let mut orbit = Vec::new();
            let mut reached_max = false;
            for _ in 0..=*steps {
                orbit.push(json!({"floor": d.floor_of(&p)?.to_string(), "edges": p.edges()}));
                match d.vershik_successor(&p) {
                    Successor::Next(n) => p = n,
                    Successor::MaxPath => {
                        reached_max = true;
                        break;
                    }
                }
            }
            let mut r = Report::new("vershik", o);
            r.set("level", *level).set("tower", *tower).set("orbit", orbit).set("reached_max", reached_max);
            r.emit(o)
        }
        Command::Frobenius { k, represent: d } => {
            let mut r = Report::new("frobenius", o);
            r.set("threshold", frobenius(k)?);
            if let Some(d) = d {
                r.set("representation", to_value(&represent(*d, k)));
            }
            r.emit(o)
        }
    }
}

//! Named groups and the dynamics-side numerics attached to them.
//!
//! Keys: `grigorchuk`, `basilica`, `ob`, `chebyshev2`, `ggs:p=3,alpha=1.2`
//! (append `,variant=ssf` to require `Σα ≡ 0 mod p`), `exceptional:d=4`,
//! `wreath:sym2` (`symN`, `altN`, `cycN`), `coset:alt3-sym3` (`altN-symN`),
//! `custom:path/to/file.grp`.

mod numerics;

use serde::Serialize;

use crate::engine::GroupPresentation;
use crate::error::{Error, Result};
use crate::group::{FiniteTypeSpec, Group, PermGroup};
use crate::perm::Degree;

pub use numerics::{
    exceptional_parameter, hyperbolicity_chi, product_of_generators_transitive,
    product_of_generators_transitive_all_orders, ComplexParameter, Nu, ParameterResiduals,
};

#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub key: String,
    pub group: Group,
    /// Known facts about the group, used by the acceptance suite.
    pub facts: Vec<String>,
}

/// Keys accepted by [`build_zoo_group`], with a one-line description.
pub const ZOO_CATALOG: &[(&str, &str)] = &[
    ("grigorchuk", "first Grigorchuk group, a=(1,1)s b=(a,c) c=(a,d) d=(1,b)"),
    ("basilica", "Basilica group, a=(1,b) b=(1,a)s"),
    ("ob", "Basilica with the extra rooted involution c=(1,1)s"),
    (
        "chebyshev2",
        "IMG of the degree-2 Chebyshev polynomial, a=(1,1)s b=(b,a)",
    ),
    (
        "ggs:p=P,alpha=A1.A2...",
        "GGS group on the P-adic tree with defining vector alpha",
    ),
    (
        "exceptional:d=D",
        "IMG of the dynamically exceptional polynomial of degree D >= 3",
    ),
    (
        "wreath:symN | altN | cycN",
        "iterated wreath product of a permutation group",
    ),
    (
        "coset:altN-symN",
        "finite-type group with labels in a single coset of Alt(N) in Sym(N)",
    ),
    ("custom:PATH", "presentation read from a .grp file"),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
struct Params(Vec<(String, String)>);

impl Params {
    fn parse(text: &str) -> Result<Self> {
        let mut out = Vec::new();
        for part in text.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("expected key=value, got `{part}`")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Params(out))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::InvalidParameter(format!("missing parameter `{key}`")))
    }

    fn only(&self, allowed: &[&str]) -> Result<()> {
        match self.0.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            Some((k, _)) => Err(Error::InvalidParameter(format!("unknown parameter `{k}`"))),
            None => Ok(()),
        }
    }
}

fn presented(key: &str, name: &str, text: &str, facts: &[&str]) -> Result<ZooEntry> {
    let p = GroupPresentation::parse(text)?.with_name(name);
    Ok(ZooEntry {
        key: key.to_string(),
        group: Group::from_presentation(p),
        facts: facts.iter().map(|s| s.to_string()).collect(),
    })
}

pub const GRIGORCHUK: &str =
    "degree 2\ngen a = (1, 1) (1 2)\ngen b = (a, c) ()\ngen c = (a, d) ()\ngen d = (1, b) ()\n";
pub const BASILICA: &str = "degree 2\ngen a = (1, b) ()\ngen b = (1, a) (1 2)\n";
pub const OB: &str = "degree 2\ngen a = (1, b) ()\ngen b = (1, a) (1 2)\ngen c = (1, 1) (1 2)\n";
pub const CHEBYSHEV2: &str = "degree 2\ngen a = (1, 1) (1 2)\ngen b = (b, a) ()\n";

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|k| k * k <= p).all(|k| !p.is_multiple_of(k))
}

/// GGS presentation: `a` the rooted cycle `(1 2 … p)`, `b` with sections
/// `a^{α_1}, …, a^{α_{p−1}}` followed by `b` itself.
pub fn ggs_presentation(p: usize, alpha: &[i64]) -> Result<GroupPresentation> {
    if !is_prime(p as u64) || p < 3 {
        return Err(Error::InvalidParameter(format!("GGS needs a prime p >= 3, got {p}")));
    }
    Degree::new(p)?;
    if alpha.len() != p - 1 {
        return Err(Error::InvalidParameter(format!(
            "defining vector needs {} entries, got {}",
            p - 1,
            alpha.len()
        )));
    }
    if alpha.iter().all(|&x| x.rem_euclid(p as i64) == 0) {
        return Err(Error::InvalidParameter("defining vector is zero mod p".into()));
    }
    let cycle: Vec<String> = (1..=p).map(|i| i.to_string()).collect();
    let mut sections: Vec<String> = alpha
        .iter()
        .map(|&x| match x.rem_euclid(p as i64) {
            0 => "1".to_string(),
            k => format!("a^{k}"),
        })
        .collect();
    sections.push("b".into());
    let text = format!(
        "degree {p}\ngen a = ({}) ({})\ngen b = ({}) ()\n",
        vec!["1"; p].join(", "),
        cycle.join(" "),
        sections.join(", ")
    );
    GroupPresentation::parse(&text)
}

/// `g0 = (g0, 1, …, 1)(2 … d)` and `g1 = (g1, 1, …, 1)(1 2)`.
pub fn exceptional_presentation(d: usize) -> Result<GroupPresentation> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!(
            "exceptional family needs d >= 3, got {d}"
        )));
    }
    Degree::new(d)?;
    let ones = vec!["1"; d - 1].join(", ");
    let cycle: Vec<String> = (2..=d).map(|i| i.to_string()).collect();
    let text = format!(
        "degree {d}\ngen g0 = (g0, {ones}) ({})\ngen g1 = (g1, {ones}) (1 2)\n",
        cycle.join(" ")
    );
    GroupPresentation::parse(&text)
}

fn perm_group(text: &str) -> Result<PermGroup> {
    let bad = || Error::InvalidParameter(format!("unknown permutation group `{text}`"));
    let (kind, n) = text.split_at(text.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?);
    let d = Degree::new(n.parse().map_err(|_| bad())?)?;
    match kind {
        "sym" => Ok(PermGroup::symmetric(d)),
        "alt" => Ok(PermGroup::alternating(d)),
        "cyc" => Ok(PermGroup::cyclic(d)),
        _ => Err(bad()),
    }
}

fn finite(key: &str, spec: FiniteTypeSpec, facts: Vec<String>) -> ZooEntry {
    ZooEntry {
        key: key.to_string(),
        group: Group::FiniteType(spec),
        facts,
    }
}

pub fn build_zoo_group(key: &str) -> Result<ZooEntry> {
    let (family, rest) = key.split_once(':').unwrap_or((key, ""));
    match family {
        "grigorchuk" => {
            let p = GroupPresentation::parse(GRIGORCHUK)?
                .with_name("grigorchuk")
                .with_provenance("standard recursion from the literature");
            Ok(ZooEntry {
                key: key.to_string(),
                group: Group::from_presentation(p),
                facts: vec!["|pi_3| = 128".into(), "super strongly fractal".into()],
            })
        }
        "basilica" => presented(key, "basilica", BASILICA, &["nucleus has 7 elements", "N1 = {1}"]),
        "ob" => presented(
            key,
            "ob",
            OB,
            &[
                "nucleus equals the Basilica nucleus",
                "N1 = {1}",
                "satisfies the contracting criterion",
            ],
        ),
        "chebyshev2" => presented(key, "chebyshev2", CHEBYSHEV2, &["FPP = 1/4", "strongly fractal"]),
        "ggs" => {
            let params = Params::parse(rest)?;
            params.only(&["p", "alpha", "variant"])?;
            let p: usize = params
                .require("p")?
                .parse()
                .map_err(|_| Error::InvalidParameter("p must be an integer".into()))?;
            let alpha: Vec<i64> = params
                .require("alpha")?
                .split('.')
                .map(|x| {
                    x.parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad alpha entry `{x}`")))
                })
                .collect::<Result<_>>()?;
            let sum_zero = alpha.iter().sum::<i64>().rem_euclid(p.max(1) as i64) == 0;
            match params.get("variant") {
                None => {}
                Some("ssf") if !sum_zero => {
                    return Err(Error::InvalidParameter("ssf variant needs sum(alpha) = 0 mod p".into()))
                }
                Some("ssf") => {}
                Some(v) => return Err(Error::InvalidParameter(format!("unknown GGS variant `{v}`"))),
            }
            let pres = ggs_presentation(p, &alpha)?.with_name(key);
            let mut facts = vec![
                "b in N1".to_string(),
                "fails the contracting criterion with witness b".to_string(),
            ];
            if sum_zero {
                facts.push("sum(alpha) = 0 mod p".into());
            }
            Ok(ZooEntry {
                key: key.to_string(),
                group: Group::from_presentation(pres),
                facts,
            })
        }
        "exceptional" => {
            let params = Params::parse(rest)?;
            params.only(&["d"])?;
            let d: usize = params
                .require("d")?
                .parse()
                .map_err(|_| Error::InvalidParameter("d must be an integer".into()))?;
            let pres = exceptional_presentation(d)?.with_name(key);
            Ok(ZooEntry {
                key: key.to_string(),
                group: Group::from_presentation(pres),
                facts: vec![
                    "FPP = 0".into(),
                    "super strongly fractal".into(),
                    format!("chi = -(1 - 1/{})", d - 1),
                ],
            })
        }
        "wreath" => {
            let spec = FiniteTypeSpec::iterated_wreath(perm_group(rest)?);
            let facts = if spec.label_classes()[0].len() > 1 {
                vec!["fixed-point proportion given by the label recursion".into()]
            } else {
                Vec::new()
            };
            Ok(finite(key, spec, facts))
        }
        "coset" => {
            let (q, p) = rest
                .split_once('-')
                .ok_or_else(|| Error::InvalidParameter("expected coset:Q-P".into()))?;
            let spec = FiniteTypeSpec::coset_type(perm_group(q)?, perm_group(p)?)?;
            let facts = if rest == "alt3-sym3" {
                vec!["FPP = 1/2".into(), "fractal but not strongly fractal".into()]
            } else {
                Vec::new()
            };
            Ok(finite(key, spec, facts))
        }
        "custom" => {
            let text = std::fs::read_to_string(rest).map_err(|e| Error::Io(format!("{rest}: {e}")))?;
            let name = std::path::Path::new(rest)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| rest.to_string());
            let pres = GroupPresentation::parse(&text)?;
            let pres = if pres.metadata.name.is_empty() {
                pres.with_name(name)
            } else {
                pres
            };
            Ok(ZooEntry {
                key: key.to_string(),
                group: Group::from_presentation(pres),
                facts: Vec::new(),
            })
        }
        _ => Err(Error::InvalidParameter(format!("unknown group key `{key}`"))),
    }
}

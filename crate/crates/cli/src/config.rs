//! Plain-text configuration files: INI-style sections holding `key = value`
//! lines, with function-call syntax for profiles and shapes and simple
//! `pi`-fraction arithmetic for angles. Unknown sections or keys are
//! rejected. Command-line overrides use `section.key=value`.

use std::path::Path;

use wettix_core::anisotropy::{AnisotropyFn, HarmonicTerm, MobilityFn, SurfaceTensionTriple};
use wettix_core::error::{Error, Result};
use wettix_core::fields::{ShapeSpec, Substrate};
use wettix_core::fronttrack::MarkerCurve;
use wettix_core::harness::{ExperimentConfig, KernelMode, ReferenceMode};
use wettix_core::vls_stepper::Comparison;
use wettix_core::Vec2;

const SECTIONS: &[(&str, &[&str])] = &[
    ("grid", &["n"]),
    ("time", &["dt", "T", "levels", "snapshots", "energy_interval"]),
    ("tensions", &["sigma_vl", "sigma_ls", "sigma_vs"]),
    ("mobilities", &["m_vl", "m_ls", "m_vs"]),
    ("kernel", &["mode", "r", "r1", "r2", "q"]),
    ("shapes", &["droplet", "substrate"]),
    (
        "solver",
        &["comparison", "band", "mu_tol", "target_area", "seed", "jobs", "substeps"],
    ),
    ("output", &["dir", "name", "reference"]),
];

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parsed file: per-section ordered key/value lists (duplicate keys allowed
/// only where unioning makes sense, i.e. `shapes.droplet`).
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: Vec<(String, String, String)>, // (section, key, value)
    pub text: String,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        let mut entries = Vec::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(k) => &raw[..k],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| cfg_err(format!("line {}: malformed section", lineno + 1)))?
                    .trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(cfg_err(format!("line {}: unknown section [{name}]", lineno + 1)));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_string();
            if section.is_empty() {
                return Err(cfg_err(format!("line {}: key outside any section", lineno + 1)));
            }
            let allowed = SECTIONS.iter().find(|(s, _)| *s == section).unwrap().1;
            if !allowed.contains(&key.as_str()) {
                return Err(cfg_err(format!(
                    "line {}: unknown key '{key}' in section [{section}]",
                    lineno + 1
                )));
            }
            if key != "droplet" && entries.iter().any(|(s, k, _)| *s == section && *k == key) {
                return Err(cfg_err(format!(
                    "line {}: duplicate key '{key}' in section [{section}]",
                    lineno + 1
                )));
            }
            entries.push((section.clone(), key, value.trim().to_string()));
        }
        Ok(ConfigFile {
            entries,
            text: text.to_string(),
        })
    }

    /// Apply a `section.key=value` override, replacing existing entries of
    /// that key (all of them, for repeatable keys) or appending.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (path, value) = spec
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("override '{spec}' is not section.key=value")))?;
        let (section, key) = path
            .trim()
            .split_once('.')
            .ok_or_else(|| cfg_err(format!("override '{spec}' is not section.key=value")))?;
        let allowed = SECTIONS
            .iter()
            .find(|(s, _)| *s == section)
            .ok_or_else(|| cfg_err(format!("override names unknown section [{section}]")))?
            .1;
        if !allowed.contains(&key) {
            return Err(cfg_err(format!(
                "override names unknown key '{key}' in section [{section}]"
            )));
        }
        self.entries
            .retain(|(s, k, _)| !(s == section && k == key));
        self.entries
            .push((section.to_string(), key.to_string(), value.trim().to_string()));
        self.text
            .push_str(&format!("\n# override: {section}.{key} = {}\n", value.trim()));
        Ok(())
    }

    fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(s, k, _)| s == section && k == key)
            .map(|(_, _, v)| v.as_str())
    }

    fn get_all(&self, section: &str, key: &str) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|(s, k, _)| s == section && k == key)
            .map(|(_, _, v)| v.as_str())
            .collect()
    }

    fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key)
            .ok_or_else(|| cfg_err(format!("missing required key {section}.{key}")))
    }

    fn num(&self, section: &str, key: &str) -> Result<f64> {
        parse_number(self.require(section, key)?)
    }

    fn num_or(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            Some(v) => parse_number(v),
            None => Ok(default),
        }
    }

    /// Build the experiment description the harness consumes.
    pub fn to_experiment(&self, out_root: &Path, jobs_flag: Option<usize>) -> Result<ExperimentConfig> {
        let n = self.num("grid", "n")? as usize;
        let dt = self.num("time", "dt")?;
        let final_time = self.num("time", "T")?;
        let levels = self.num_or("time", "levels", 1.0)? as usize;
        let snapshots = match self.get("time", "snapshots") {
            Some(v) => v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(parse_number)
                .collect::<Result<Vec<f64>>>()?,
            None => Vec::new(),
        };
        let energy_interval = self.num_or("time", "energy_interval", 0.0)? as usize;

        let sigma_vl = parse_anisotropy(self.require("tensions", "sigma_vl")?)?;
        let sigma_ls = parse_anisotropy(self.require("tensions", "sigma_ls")?)?;
        let sigma_vs = parse_anisotropy(self.require("tensions", "sigma_vs")?)?;
        let m_vl = parse_mobility(self.get("mobilities", "m_vl").unwrap_or("constant(1)"))?;
        let m_ls = parse_mobility(self.get("mobilities", "m_ls").unwrap_or("constant(1)"))?;
        let m_vs = parse_mobility(self.get("mobilities", "m_vs").unwrap_or("constant(1)"))?;
        let tensions =
            SurfaceTensionTriple::new(sigma_vl, sigma_ls, sigma_vs, m_vl, m_ls, m_vs)?;

        let kernel = match self.get("kernel", "mode").unwrap_or("single") {
            "single" => KernelMode::SingleCircle {
                r: self.num_or("kernel", "r", 1.0)?,
            },
            "two" => KernelMode::TwoCircle {
                r1: self.num("kernel", "r1")?,
                r2: self.num("kernel", "r2")?,
            },
            other => return Err(cfg_err(format!("kernel.mode must be single or two, got '{other}'"))),
        };
        let q = self.num_or("kernel", "q", 100.0)? as usize;

        let droplets = self.get_all("shapes", "droplet");
        if droplets.is_empty() {
            return Err(cfg_err("missing required key shapes.droplet"));
        }
        let mut droplet = parse_shape(droplets[0])?;
        for d in &droplets[1..] {
            droplet = ShapeSpec::Union(Box::new(droplet), Box::new(parse_shape(d)?));
        }
        let substrate = parse_substrate(self.get("shapes", "substrate").unwrap_or("none"))?;

        let comparison = match self.get("solver", "comparison").unwrap_or("nonstrict") {
            "strict" => Comparison::Strict,
            "nonstrict" => Comparison::NonStrict,
            other => return Err(cfg_err(format!("solver.comparison must be strict or nonstrict, got '{other}'"))),
        };
        let band_enabled = match self.get("solver", "band").unwrap_or("on") {
            "on" => true,
            "off" => false,
            other => return Err(cfg_err(format!("solver.band must be on or off, got '{other}'"))),
        };
        let mu_tol = self.get("solver", "mu_tol").map(parse_number).transpose()?;
        let target_area = self
            .get("solver", "target_area")
            .map(parse_number)
            .transpose()?;
        let seed = self.num_or("solver", "seed", 0.0)? as u64;
        let substeps = self.num_or("solver", "substeps", 1.0)? as usize;
        let jobs = jobs_flag.unwrap_or(self.num_or("solver", "jobs", 1.0)? as usize);

        let name = self
            .get("output", "name")
            .unwrap_or("experiment")
            .to_string();
        let dir = self.get("output", "dir").unwrap_or(&name).to_string();
        let reference = parse_reference(self.get("output", "reference").unwrap_or("finest_self"))?;
        let ft_init = match reference {
            ReferenceMode::Fronttrack { resolution } => {
                Some(ft_init_from_shape(&droplet, &substrate, resolution)?)
            }
            _ => None,
        };

        Ok(ExperimentConfig {
            name,
            n,
            dt,
            final_time,
            levels,
            tensions,
            kernel,
            q,
            droplet,
            substrate,
            target_area,
            comparison,
            band_enabled,
            mu_tol,
            reference,
            ft_init,
            out_dir: out_root.join(dir),
            seed,
            snapshots,
            energy_interval,
            substeps,
            jobs,
            snapshot_text: Some(self.text.clone()),
        })
    }
}

/// Numbers with optional `pi` arithmetic: `0.5`, `pi`, `-pi/3`, `2*pi`,
/// `3*pi/8`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        if v.is_finite() {
            return Ok(v);
        }
        return Err(cfg_err(format!("non-finite number '{s}'")));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, s),
    };
    let (num_part, den): (&str, f64) = match body.split_once('/') {
        Some((a, b)) => (
            a.trim(),
            b.trim()
                .parse::<f64>()
                .map_err(|_| cfg_err(format!("bad denominator in '{s}'")))?,
        ),
        None => (body, 1.0),
    };
    let coeff = match num_part.split_once('*') {
        Some((c, p)) if p.trim() == "pi" => c
            .trim()
            .parse::<f64>()
            .map_err(|_| cfg_err(format!("bad coefficient in '{s}'")))?,
        None if num_part == "pi" => 1.0,
        _ => return Err(cfg_err(format!("cannot parse number '{s}'"))),
    };
    let v = coeff * std::f64::consts::PI / den;
    Ok(if neg { -v } else { v })
}

/// Split `name(arg1, arg2, ...)`, honoring nested parentheses in args.
fn parse_call(s: &str) -> Result<(String, Vec<String>)> {
    let s = s.trim();
    let open = s
        .find('(')
        .ok_or_else(|| cfg_err(format!("expected name(args) in '{s}'")))?;
    if !s.ends_with(')') {
        return Err(cfg_err(format!("missing closing parenthesis in '{s}'")));
    }
    let name = s[..open].trim().to_string();
    let body = &s[open + 1..s.len() - 1];
    let mut args = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in body.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| cfg_err(format!("unbalanced parentheses in '{s}'")))?;
                cur.push(ch);
            }
            ',' if depth == 0 => {
                args.push(cur.trim().to_string());
                cur.clear();
            }
            _ => cur.push(ch),
        }
    }
    if !cur.trim().is_empty() {
        args.push(cur.trim().to_string());
    }
    Ok((name, args))
}

fn expect_args(name: &str, args: &[String], n: usize) -> Result<()> {
    if args.len() != n {
        return Err(cfg_err(format!("{name}() takes {n} arguments, got {}", args.len())));
    }
    Ok(())
}

fn parse_harmonic_terms(args: &[String]) -> Result<Vec<HarmonicTerm>> {
    if !args.len().is_multiple_of(3) {
        return Err(cfg_err(
            "harmonics() takes c0 followed by amplitude,frequency,phase triples".to_string(),
        ));
    }
    args.chunks(3)
        .map(|c| {
            Ok(HarmonicTerm {
                amplitude: parse_number(&c[0])?,
                frequency: parse_number(&c[1])? as u32,
                phase: parse_number(&c[2])?,
            })
        })
        .collect()
}

/// Surface tension profiles: `constant(c)`, `sqrt_sin2(a, phase)` for
/// sqrt(1 + a sin^2(theta - phase)), `sqrt_cos2(a, phase)`, and
/// `harmonics(c0, A,k,phase, ...)`.
pub fn parse_anisotropy(s: &str) -> Result<AnisotropyFn> {
    let (name, args) = parse_call(s)?;
    match name.as_str() {
        "constant" => {
            expect_args("constant", &args, 1)?;
            AnisotropyFn::constant(parse_number(&args[0])?)
        }
        "sqrt_sin2" => {
            expect_args("sqrt_sin2", &args, 2)?;
            AnisotropyFn::sqrt_sin2(parse_number(&args[0])?, parse_number(&args[1])?)
        }
        "sqrt_cos2" => {
            expect_args("sqrt_cos2", &args, 2)?;
            AnisotropyFn::sqrt_cos2(parse_number(&args[0])?, parse_number(&args[1])?)
        }
        "harmonics" => {
            if args.is_empty() {
                return Err(cfg_err("harmonics() needs at least c0".to_string()));
            }
            AnisotropyFn::harmonics(parse_number(&args[0])?, parse_harmonic_terms(&args[1..])?)
        }
        other => Err(cfg_err(format!("unknown surface tension form '{other}'"))),
    }
}

/// Mobility profiles: the anisotropy forms plus
/// `induced(<sigma-form>, r)` = 4 r^2 / (sigma + sigma'').
pub fn parse_mobility(s: &str) -> Result<MobilityFn> {
    let (name, args) = parse_call(s)?;
    match name.as_str() {
        "constant" => {
            expect_args("constant", &args, 1)?;
            MobilityFn::constant(parse_number(&args[0])?)
        }
        "harmonics" => {
            if args.is_empty() {
                return Err(cfg_err("harmonics() needs at least c0".to_string()));
            }
            MobilityFn::harmonics(parse_number(&args[0])?, parse_harmonic_terms(&args[1..])?)
        }
        "induced" => {
            expect_args("induced", &args, 2)?;
            let sigma = parse_anisotropy(&args[0])?;
            MobilityFn::induced(&sigma, parse_number(&args[1])?)
        }
        "sqrt_sin2" | "sqrt_cos2" => {
            let sigma = parse_anisotropy(s)?;
            MobilityFn::new(sigma.profile().clone())
        }
        other => Err(cfg_err(format!("unknown mobility form '{other}'"))),
    }
}

/// Droplet shapes: `disc(cx, cy, r)`, `rect(x0, y0, x1, y1)`,
/// `polygon(x1,y1, x2,y2, ...)` (counterclockwise loop).
pub fn parse_shape(s: &str) -> Result<ShapeSpec> {
    let (name, args) = parse_call(s)?;
    match name.as_str() {
        "disc" => {
            expect_args("disc", &args, 3)?;
            Ok(ShapeSpec::Disc {
                center: Vec2::new(parse_number(&args[0])?, parse_number(&args[1])?),
                radius: parse_number(&args[2])?,
            })
        }
        "rect" => {
            expect_args("rect", &args, 4)?;
            let (x0, y0) = (parse_number(&args[0])?, parse_number(&args[1])?);
            let (x1, y1) = (parse_number(&args[2])?, parse_number(&args[3])?);
            Ok(ShapeSpec::Polygon(vec![
                Vec2::new(x0, y0),
                Vec2::new(x1, y0),
                Vec2::new(x1, y1),
                Vec2::new(x0, y1),
            ]))
        }
        "polygon" => {
            if args.len() < 6 || args.len() % 2 != 0 {
                return Err(cfg_err("polygon() needs at least 3 x,y pairs".to_string()));
            }
            let pts = args
                .chunks(2)
                .map(|c| Ok(Vec2::new(parse_number(&c[0])?, parse_number(&c[1])?)))
                .collect::<Result<Vec<Vec2>>>()?;
            Ok(ShapeSpec::Polygon(pts))
        }
        other => Err(cfg_err(format!("unknown droplet shape '{other}'"))),
    }
}

/// Substrates: `none`, `flat(h)`, `parabola(coeff, x0, y0)` for
/// y = coeff (x-x0)^2 + y0, `sinusoid(amplitude, waves, x0, y0)` for
/// y = amplitude sin(2 pi waves (x-x0)) + y0.
pub fn parse_substrate(s: &str) -> Result<Substrate> {
    if s.trim() == "none" {
        return Ok(Substrate::None);
    }
    let (name, args) = parse_call(s)?;
    match name.as_str() {
        "flat" => {
            expect_args("flat", &args, 1)?;
            Ok(Substrate::Flat {
                height: parse_number(&args[0])?,
            })
        }
        "parabola" => {
            expect_args("parabola", &args, 3)?;
            Ok(Substrate::Parabola {
                coeff: parse_number(&args[0])?,
                x0: parse_number(&args[1])?,
                y0: parse_number(&args[2])?,
            })
        }
        "sinusoid" => {
            expect_args("sinusoid", &args, 4)?;
            Ok(Substrate::Sinusoid {
                amplitude: parse_number(&args[0])?,
                waves: parse_number(&args[1])?,
                x0: parse_number(&args[2])?,
                y0: parse_number(&args[3])?,
            })
        }
        other => Err(cfg_err(format!("unknown substrate '{other}'"))),
    }
}

fn parse_reference(s: &str) -> Result<ReferenceMode> {
    match s.trim() {
        "winterbottom" => Ok(ReferenceMode::Winterbottom),
        "finest_self" => Ok(ReferenceMode::FinestSelf),
        other => {
            let (name, args) = parse_call(other)?;
            if name == "fronttrack" {
                expect_args("fronttrack", &args, 1)?;
                Ok(ReferenceMode::Fronttrack {
                    resolution: parse_number(&args[0])? as usize,
                })
            } else {
                Err(cfg_err(format!("unknown reference mode '{other}'")))
            }
        }
    }
}

/// Initial marker polyline for the front-tracking reference, derived from
/// the droplet shape on a flat substrate: circular cap for a disc, the
/// above-substrate vertex chain for a polygon.
pub fn ft_init_from_shape(
    droplet: &ShapeSpec,
    substrate: &Substrate,
    resolution: usize,
) -> Result<Vec<Vec2>> {
    let h = match substrate {
        Substrate::Flat { height } => *height,
        _ => {
            return Err(cfg_err(
                "the fronttrack reference needs a flat substrate",
            ))
        }
    };
    match droplet {
        ShapeSpec::Disc { center, radius } => {
            if center.y - radius >= h {
                return Err(cfg_err("disc does not touch the substrate"));
            }
            if center.y + radius <= h {
                return Err(cfg_err("disc lies entirely inside the solid"));
            }
            // half-opening angle of the cap above y = h
            let cosang = (h - center.y) / radius;
            let ang = cosang.acos();
            let curve =
                MarkerCurve::circular_cap(center.x, h, *radius, ang, resolution)?;
            Ok(curve.points)
        }
        ShapeSpec::Polygon(pts) => {
            let tol = 1e-12;
            let m = pts.len();
            // rotate so the chain starts at a substrate vertex and
            // immediately leaves the substrate (the other direction walks
            // along the substrate edge instead of the liquid-vapor arc)
            let on = |p: &Vec2| (p.y - h).abs() <= tol;
            let start = (0..m)
                .find(|&i| on(&pts[i]) && !on(&pts[(i + 1) % m]))
                .ok_or_else(|| cfg_err("polygon has no vertex on the substrate"))?;
            let mut chain: Vec<Vec2> = Vec::new();
            for k in 0..m {
                let p = pts[(start + k) % m];
                chain.push(p);
                if k > 0 && on(&p) {
                    break;
                }
            }
            if chain.len() < 3 || !on(chain.last().unwrap()) {
                return Err(cfg_err(
                    "polygon does not form a single arc between two substrate contacts",
                ));
            }
            // orient left-to-right and snap endpoints exactly onto the line
            if chain.first().unwrap().x > chain.last().unwrap().x {
                chain.reverse();
            }
            chain.first_mut().unwrap().y = h;
            chain.last_mut().unwrap().y = h;
            let curve = MarkerCurve::resampled(&chain, h, resolution)?;
            Ok(curve.points)
        }
        _ => Err(cfg_err(
            "fronttrack reference supports disc or polygon droplets only",
        )),
    }
}

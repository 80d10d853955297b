//! Text formats for regions.
//!
//! Grid regions: a `key: value` header followed by one run-length line per
//! base cell. Each line alternates runs of unset and set fiber cells,
//! starting with an unset run (possibly 0).
//!
//! ```text
//! # warpsym grid region v1
//! space: flat-strip
//! base: 0 1 100
//! fiber: -2 2 400 open signed
//! rows:
//! 0 180 40 180
//! ```
//!
//! Profile regions: CSV with `# key: value` comment lines.
//!
//! ```text
//! # warpsym profile region v1
//! # space: flat-strip
//! # form: ball
//! b,radius,center
//! 0,0.5,0.5
//! ```

use crate::error::{Error, Result};
use crate::spaces::GridScheme;

use super::grid::GridRegion;
use super::profile::{ProfileRegion, SliceForm};

const GRID_MAGIC: &str = "# warpsym grid region v1";
const PROFILE_MAGIC: &str = "# warpsym profile region v1";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    match tok.trim() {
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse().map_err(|_| parse_err(line, format!("expected a number, got `{t}`"))),
    }
}

fn parse_usize(tok: &str, line: usize) -> Result<usize> {
    tok.trim()
        .parse()
        .map_err(|_| parse_err(line, format!("expected a count, got `{tok}`")))
}

fn fmt_f64(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

impl GridRegion {
    pub fn to_text(&self, space_id: &str) -> String {
        let s = &self.scheme;
        let mut out = format!(
            "{GRID_MAGIC}\nspace: {space_id}\nbase: {} {} {}\nfiber: {} {} {} {} {}\nrows:\n",
            fmt_f64(s.base_lo),
            fmt_f64(s.base_hi),
            s.base_cells,
            fmt_f64(s.fiber_lo),
            fmt_f64(s.fiber_hi),
            s.fiber_cells,
            if s.periodic { "periodic" } else { "open" },
            if s.radial { "radial" } else { "signed" },
        );
        for i in 0..s.base_cells {
            let mut runs = Vec::new();
            let mut want = false;
            let mut count = 0usize;
            for &c in self.row(i) {
                if c == want {
                    count += 1;
                } else {
                    runs.push(count);
                    want = c;
                    count = 1;
                }
            }
            runs.push(count);
            let line: Vec<String> = runs.iter().map(|r| r.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the grid format; returns the region and its space id.
    pub fn from_text(text: &str) -> Result<(GridRegion, String)> {
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
        let mut next = |what: &str| -> Result<(usize, &str)> {
            lines
                .by_ref()
                .find(|(_, l)| !l.is_empty())
                .ok_or_else(|| parse_err(0, format!("unexpected end of file, expected {what}")))
        };
        let (n, magic) = next("header")?;
        if magic != GRID_MAGIC {
            return Err(parse_err(n, format!("expected `{GRID_MAGIC}`")));
        }
        let field = |(n, l): (usize, &str), key: &str| -> Result<Vec<String>> {
            let rest = l
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(':'))
                .ok_or_else(|| parse_err(n, format!("expected `{key}:`")))?;
            Ok(rest.split_whitespace().map(str::to_string).collect())
        };
        let space_line = next("space")?;
        let space_id = field(space_line, "space")?.join(" ");
        let base_line = next("base")?;
        let base = field(base_line, "base")?;
        if base.len() != 3 {
            return Err(parse_err(base_line.0, "base needs `lo hi cells`"));
        }
        let fiber_line = next("fiber")?;
        let fiber = field(fiber_line, "fiber")?;
        if fiber.len() != 5 {
            return Err(parse_err(fiber_line.0, "fiber needs `lo hi cells open|periodic signed|radial`"));
        }
        let nl = fiber_line.0;
        let scheme = GridScheme {
            base_lo: parse_f64(&base[0], base_line.0)?,
            base_hi: parse_f64(&base[1], base_line.0)?,
            base_cells: parse_usize(&base[2], base_line.0)?,
            fiber_lo: parse_f64(&fiber[0], nl)?,
            fiber_hi: parse_f64(&fiber[1], nl)?,
            fiber_cells: parse_usize(&fiber[2], nl)?,
            periodic: match fiber[3].as_str() {
                "periodic" => true,
                "open" => false,
                o => return Err(parse_err(nl, format!("expected open|periodic, got `{o}`"))),
            },
            radial: match fiber[4].as_str() {
                "radial" => true,
                "signed" => false,
                o => return Err(parse_err(nl, format!("expected signed|radial, got `{o}`"))),
            },
        };
        if scheme.base_cells == 0 || scheme.fiber_cells == 0 || !(scheme.base_hi > scheme.base_lo) || !(scheme.fiber_hi > scheme.fiber_lo) {
            return Err(parse_err(nl, "grid ranges must be non-empty"));
        }
        let rows_line = next("rows")?;
        if rows_line.1 != "rows:" {
            return Err(parse_err(rows_line.0, "expected `rows:`"));
        }
        let mut cells = Vec::with_capacity(scheme.len());
        for i in 0..scheme.base_cells {
            let (n, l) = next("a row")?;
            let mut set = false;
            let mut width = 0;
            for tok in l.split_whitespace() {
                let r = parse_usize(tok, n)?;
                cells.extend(std::iter::repeat_n(set, r));
                width += r;
                set = !set;
            }
            if width != scheme.fiber_cells {
                return Err(parse_err(n, format!("row {i} covers {width} cells, expected {}", scheme.fiber_cells)));
            }
        }
        if let Some((n, _)) = lines.find(|(_, l)| !l.is_empty()) {
            return Err(parse_err(n, "trailing content after the last row"));
        }
        Ok((GridRegion::from_cells(scheme, cells)?, space_id))
    }
}

impl ProfileRegion {
    pub fn to_csv(&self, space_id: &str) -> String {
        let form = match self.form {
            SliceForm::Ball => "ball",
            SliceForm::LowerRay => "lower-ray",
        };
        let mut out = format!("{PROFILE_MAGIC}\n# space: {space_id}\n# form: {form}\nb,radius,center\n");
        for k in 0..self.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(self.base[k]),
                fmt_f64(self.radius[k]),
                fmt_f64(self.center[k])
            ));
        }
        out
    }

    /// Parses the profile CSV; returns the region and its space id (empty
    /// when the file names none).
    pub fn from_csv(text: &str) -> Result<(ProfileRegion, String)> {
        let mut space_id = String::new();
        let mut form = SliceForm::Ball;
        let (mut base, mut radius, mut center) = (Vec::new(), Vec::new(), Vec::new());
        let mut header_seen = false;
        for (k, raw) in text.lines().enumerate() {
            let n = k + 1;
            let l = raw.trim();
            if l.is_empty() {
                continue;
            }
            if let Some(c) = l.strip_prefix('#') {
                let c = c.trim();
                if let Some(v) = c.strip_prefix("space:") {
                    space_id = v.trim().to_string();
                } else if let Some(v) = c.strip_prefix("form:") {
                    form = match v.trim() {
                        "ball" => SliceForm::Ball,
                        "lower-ray" => SliceForm::LowerRay,
                        o => return Err(parse_err(n, format!("unknown slice form `{o}`"))),
                    };
                }
                continue;
            }
            if !header_seen {
                let cols: Vec<&str> = l.split(',').map(str::trim).collect();
                if cols != ["b", "radius", "center"] {
                    return Err(parse_err(n, "expected the header `b,radius,center`"));
                }
                header_seen = true;
                continue;
            }
            let cols: Vec<&str> = l.split(',').collect();
            if cols.len() != 3 {
                return Err(parse_err(n, format!("expected 3 columns, got {}", cols.len())));
            }
            base.push(parse_f64(cols[0], n)?);
            radius.push(parse_f64(cols[1], n)?);
            center.push(parse_f64(cols[2], n)?);
        }
        if !header_seen {
            return Err(parse_err(0, "missing `b,radius,center` header"));
        }
        Ok((ProfileRegion::new(form, base, radius, center)?, space_id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{FiberGeometry, ScalarFn, WarpedSpace};

    #[test]
    fn grid_round_trip() {
        let s = WarpedSpace::product("flat", [0.0, 1.0], FiberGeometry::line(ScalarFn::ONE, 1.5));
        let sch = GridScheme::new(&s, 13, 17).unwrap();
        let r = GridRegion::from_predicate(sch, |b, t| (t - 0.3 * b).abs() < 0.4 || t > 1.2);
        let text = r.to_text("flat");
        let (back, id) = GridRegion::from_text(&text).unwrap();
        assert_eq!(id, "flat");
        assert_eq!(back, r);
    }

    #[test]
    fn grid_rejects_short_rows() {
        let text = format!("{GRID_MAGIC}\nspace: x\nbase: 0 1 1\nfiber: 0 1 3 open signed\nrows:\n1 1\n");
        assert!(matches!(GridRegion::from_text(&text), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn profile_round_trip_is_exact() {
        let p = ProfileRegion::from_fn(0.0, 1.0, 7, |b| (0.1 + b / 3.0, (b * 7.0).sin() / 11.0)).unwrap();
        let (back, id) = ProfileRegion::from_csv(&p.to_csv("s")).unwrap();
        assert_eq!(id, "s");
        assert_eq!(back, p);
        let rays = ProfileRegion::rays_from_fn(0.0, 1.0, 3, |b| if b > 0.4 { b } else { f64::NEG_INFINITY }).unwrap();
        assert_eq!(ProfileRegion::from_csv(&rays.to_csv("s")).unwrap().0, rays);
    }
}

//! Knot diagrams as Gauss codes, with combinatorial Reidemeister I/II
//! reduction and the knot determinant `|Delta(-1)|`.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::determinant::abs_determinant;
use crate::error::{Error, Result};

/// One passage of the curve through a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaussEntry {
    pub crossing: usize,
    pub over: bool,
}

/// A crossing in arc form. Arcs run from one undercrossing to the next, so
/// a knot diagram with `c >= 1` crossings has exactly `c` arcs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub over_arc: usize,
    pub under_in: usize,
    pub under_out: usize,
    /// `+1` or `-1`; `0` when the diagram was built without orientation data.
    pub sign: i8,
}

/// Closed-curve diagram: one Gauss code per component and a sign per crossing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagram {
    components: Vec<Vec<GaussEntry>>,
    signs: Vec<i8>,
}

impl Diagram {
    /// The crossing-free diagram of the unknot.
    pub fn unknot() -> Self {
        Diagram { components: vec![Vec::new()], signs: Vec::new() }
    }

    /// Validates that crossings are numbered `0..c` and that each is passed
    /// exactly once over and once under across all components.
    pub fn from_components(components: Vec<Vec<GaussEntry>>, signs: Vec<i8>) -> Result<Self> {
        let c = signs.len();
        let mut seen = vec![(0u8, 0u8); c];
        for e in components.iter().flatten() {
            let slot = seen
                .get_mut(e.crossing)
                .ok_or_else(|| Error::InvalidDiagram(format!("crossing {} has no sign entry", e.crossing)))?;
            if e.over {
                slot.0 += 1;
            } else {
                slot.1 += 1;
            }
        }
        if let Some(bad) = seen.iter().position(|&s| s != (1, 1)) {
            return Err(Error::InvalidDiagram(format!("crossing {bad} is not passed once over and once under")));
        }
        if signs.iter().any(|s| !matches!(s, -1..=1)) {
            return Err(Error::InvalidDiagram("crossing signs must be -1, 0 or +1".into()));
        }
        Ok(Diagram { components, signs })
    }

    pub fn from_gauss(code: Vec<GaussEntry>, signs: Vec<i8>) -> Result<Self> {
        Self::from_components(vec![code], signs)
    }

    /// Classical signed Gauss notation: crossings labelled `1..=c`, positive
    /// for an overpass and negative for an underpass, e.g. the trefoil
    /// `[1, -2, 3, -1, 2, -3]`. Signs are left unknown.
    pub fn from_signed_gauss(code: &[i64]) -> Result<Self> {
        let c = code.iter().map(|x| x.unsigned_abs() as usize).max().unwrap_or(0);
        if code.contains(&0) {
            return Err(Error::InvalidDiagram("crossing labels start at 1".into()));
        }
        let entries =
            code.iter().map(|&x| GaussEntry { crossing: x.unsigned_abs() as usize - 1, over: x > 0 }).collect();
        Self::from_gauss(entries, vec![0; c])
    }

    pub fn crossing_count(&self) -> usize {
        self.signs.len()
    }

    pub fn strand_count(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Vec<GaussEntry>] {
        &self.components
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Sum of crossing signs.
    pub fn writhe(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }

    fn single_code(&self) -> Result<&[GaussEntry]> {
        match self.components.as_slice() {
            [code] => Ok(code),
            _ => Err(Error::InvalidDiagram(format!(
                "expected a single closed component, found {}",
                self.components.len()
            ))),
        }
    }

    /// Arc-form crossings of a one-component diagram.
    pub fn crossings(&self) -> Result<Vec<Crossing>> {
        let code = self.single_code()?;
        let c = self.crossing_count();
        let mut out = vec![Crossing { over_arc: 0, under_in: 0, under_out: 0, sign: 0 }; c];
        // arc index of position p = undercrossings strictly before p, mod c
        let mut unders_before = 0;
        for e in code {
            let arc = unders_before % c.max(1);
            let x = &mut out[e.crossing];
            if e.over {
                x.over_arc = arc;
            } else {
                x.under_in = arc;
                x.under_out = (unders_before + 1) % c;
                unders_before += 1;
            }
        }
        for (x, &s) in out.iter_mut().zip(&self.signs) {
            x.sign = s;
        }
        Ok(out)
    }

    /// Repeatedly removes Reidemeister I loops (a crossing met twice in a
    /// row) and Reidemeister II bigons (two crossings met consecutively as
    /// overpasses on one strand and consecutively as underpasses on another).
    pub fn reduced(&self) -> Diagram {
        if self.components.len() != 1 {
            return self.clone();
        }
        let mut code = self.components[0].clone();
        let mut alive = vec![true; self.signs.len()];
        loop {
            let m = code.len();
            if m == 0 {
                break;
            }
            let mut removed: Option<Vec<usize>> = None;
            // R-I
            for p in 0..m {
                let q = (p + 1) % m;
                if p != q && code[p].crossing == code[q].crossing {
                    removed = Some(vec![code[p].crossing]);
                    break;
                }
            }
            // R-II
            if removed.is_none() && m >= 4 {
                let mut pos = vec![[usize::MAX; 2]; alive.len()];
                for (p, e) in code.iter().enumerate() {
                    pos[e.crossing][e.over as usize] = p;
                }
                'outer: for p in 0..m {
                    let q = (p + 1) % m;
                    let (a, b) = (code[p], code[q]);
                    if a.crossing == b.crossing || a.over != b.over {
                        continue;
                    }
                    let other = (!a.over) as usize;
                    let (pa, pb) = (pos[a.crossing][other], pos[b.crossing][other]);
                    if (pa + 1) % m == pb || (pb + 1) % m == pa {
                        removed = Some(vec![a.crossing, b.crossing]);
                        break 'outer;
                    }
                }
            }
            match removed {
                Some(ids) => {
                    for &id in &ids {
                        alive[id] = false;
                    }
                    code.retain(|e| !ids.contains(&e.crossing));
                }
                None => break,
            }
        }
        let mut renumber = vec![usize::MAX; alive.len()];
        let mut signs = Vec::new();
        for (old, _) in alive.iter().enumerate().filter(|(_, &a)| a) {
            renumber[old] = signs.len();
            signs.push(self.signs[old]);
        }
        let code = code.into_iter().map(|e| GaussEntry { crossing: renumber[e.crossing], over: e.over }).collect();
        Diagram { components: vec![code], signs }
    }

    /// Coloring matrix at `t = -1`: row `x` has `+2` in the over arc and
    /// `-1` in each of the two under arcs.
    pub fn coloring_matrix(&self) -> Result<Vec<Vec<i64>>> {
        let c = self.crossing_count();
        let mut m = vec![vec![0i64; c]; c];
        for (row, x) in self.crossings()?.iter().enumerate() {
            m[row][x.over_arc] += 2;
            m[row][x.under_in] -= 1;
            m[row][x.under_out] -= 1;
        }
        Ok(m)
    }

    /// `|Delta(-1)|`, from any first minor of the coloring matrix after
    /// Reidemeister reduction. Always odd for a knot.
    pub fn determinant(&self) -> Result<u64> {
        self.single_code()?;
        let reduced = self.reduced();
        let c = reduced.crossing_count();
        if c == 0 {
            return Ok(1);
        }
        let m = reduced.coloring_matrix()?;
        let minor: Vec<Vec<i64>> = m[..c - 1].iter().map(|r| r[..c - 1].to_vec()).collect();
        let d =
            abs_determinant(&minor).to_u64().ok_or_else(|| Error::InvalidDiagram("determinant exceeds u64".into()))?;
        assert!(d % 2 == 1, "knot determinant must be odd, got {d}");
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const TREFOIL: [i64; 6] = [1, -2, 3, -1, 2, -3];
    pub(crate) const FIGURE_EIGHT: [i64; 8] = [1, -2, 3, -1, 4, -3, 2, -4];

    #[test]
    fn arcs_match_crossings() {
        let d = Diagram::from_signed_gauss(&TREFOIL).unwrap();
        let xs = d.crossings().unwrap();
        assert_eq!(xs.len(), 3);
        for x in &xs {
            assert!(x.over_arc < 3 && x.under_in < 3 && x.under_out < 3);
            assert_ne!(x.under_in, x.under_out);
        }
        // every arc ends at exactly one crossing
        let mut ends: Vec<usize> = xs.iter().map(|x| x.under_in).collect();
        ends.sort();
        assert_eq!(ends, vec![0, 1, 2]);
    }

    #[test]
    fn fixture_determinants() {
        assert_eq!(Diagram::unknot().determinant().unwrap(), 1);
        assert_eq!(Diagram::from_signed_gauss(&TREFOIL).unwrap().determinant().unwrap(), 3);
        assert_eq!(Diagram::from_signed_gauss(&FIGURE_EIGHT).unwrap().determinant().unwrap(), 5);
        // (2, q) torus knots have determinant q
        for q in [5i64, 7, 9] {
            let code: Vec<i64> = (0..2 * q).map(|i| if i % 2 == 0 { i % q + 1 } else { -(i % q + 1) }).collect();
            assert_eq!(Diagram::from_signed_gauss(&code).unwrap().determinant().unwrap(), q as u64);
        }
    }

    #[test]
    fn trefoil_minor_by_hand() {
        let m = Diagram::from_signed_gauss(&TREFOIL).unwrap().coloring_matrix().unwrap();
        for row in &m {
            assert_eq!(row.iter().sum::<i64>(), 0);
        }
        let minor = [[m[0][0], m[0][1]], [m[1][0], m[1][1]]];
        let det = minor[0][0] * minor[1][1] - minor[0][1] * minor[1][0];
        assert_eq!(det.abs(), 3);
    }

    #[test]
    fn reidemeister_moves_leave_determinant_unchanged() {
        // kink inserted into the trefoil: crossing 4 met twice in a row
        let kinked = [1, -2, 4, -4, 3, -1, 2, -3];
        let d = Diagram::from_signed_gauss(&kinked).unwrap();
        assert_eq!(d.reduced().crossing_count(), 3);
        assert_eq!(d.determinant().unwrap(), 3);
        // a strand pushed over another: crossings 4, 5 form a bigon
        let poked = [1, 4, 5, -2, 3, -1, -5, -4, 2, -3];
        let d = Diagram::from_signed_gauss(&poked).unwrap();
        assert_eq!(d.reduced().crossing_count(), 3);
        assert_eq!(d.determinant().unwrap(), 3);
        // the standard two-crossing unknot diagram reduces away entirely
        let d = Diagram::from_signed_gauss(&[1, 2, -1, -2]).unwrap();
        assert_eq!(d.reduced().crossing_count(), 0);
        assert_eq!(d.determinant().unwrap(), 1);
        // one-crossing curl
        assert_eq!(Diagram::from_signed_gauss(&[1, -1]).unwrap().determinant().unwrap(), 1);
    }

    #[test]
    fn invalid_diagrams() {
        assert!(Diagram::from_signed_gauss(&[1, 2, -1]).is_err());
        assert!(Diagram::from_signed_gauss(&[1, 1]).is_err());
        assert!(Diagram::from_signed_gauss(&[0]).is_err());
        let link = Diagram::from_components(
            vec![
                vec![GaussEntry { crossing: 0, over: true }, GaussEntry { crossing: 1, over: false }],
                vec![GaussEntry { crossing: 0, over: false }, GaussEntry { crossing: 1, over: true }],
            ],
            vec![1, 1],
        )
        .unwrap();
        assert_eq!(link.strand_count(), 2);
        assert!(matches!(link.determinant(), Err(Error::InvalidDiagram(_))));
    }
}

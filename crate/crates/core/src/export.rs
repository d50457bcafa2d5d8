//! CSV writers for spectra and mode profiles.
//!
//! Numbers are written as `{:.16e}` (17 significant digits) so that doubles
//! round-trip exactly.

use std::io::{self, Write};

use nalgebra::ComplexField;

use crate::scalar::Real;
use crate::spectrum::{EigenMode, MajoranaPair};

fn num<T: Real>(x: T) -> String {
    format!("{x:.16e}")
}

/// `index, energy, class` for each mode in the given order.
pub fn write_spectrum_csv<T: Real, W: Write>(mut w: W, modes: &[EigenMode<T>]) -> io::Result<()> {
    writeln!(w, "index,energy,class")?;
    for (i, m) in modes.iter().enumerate() {
        let class = m.class.map_or_else(|| "unclassified".to_string(), |c| c.to_string());
        writeln!(w, "{i},{},{class}", num(m.energy))?;
    }
    Ok(())
}

/// `site, re_e, im_e, re_h, im_h, abs2_e, abs2_h` with 1-based sites.
pub fn write_profile_csv<T: Real, W: Write>(mut w: W, mode: &EigenMode<T>) -> io::Result<()> {
    writeln!(w, "site,re_e,im_e,re_h,im_h,abs2_e,abs2_h")?;
    for (i, (e, h)) in mode.electron_amp.iter().zip(mode.hole_amp.iter()).enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            i + 1,
            num(e.re),
            num(e.im),
            num(h.re),
            num(h.im),
            num(e.modulus_squared()),
            num(h.modulus_squared())
        )?;
    }
    Ok(())
}

/// `site, abs2_g, abs2_h` with 1-based sites.
pub fn write_majorana_csv<T: Real, W: Write>(mut w: W, pair: &MajoranaPair<T>) -> io::Result<()> {
    writeln!(w, "site,abs2_g,abs2_h")?;
    for (i, (g, h)) in pair.g.iter().zip(pair.h.iter()).enumerate() {
        writeln!(w, "{},{},{}", i + 1, num(g.modulus_squared()), num(h.modulus_squared()))?;
    }
    Ok(())
}

use std::io::{BufRead, BufReader, Read, Write};

use cantor_qc::{jacobian, phi, phi_inverse, Complex, ConstructionParams};

use crate::output::{num, Failure, Outcome};

pub struct EvalOptions {
    pub depth: u32,
    pub inverse: bool,
    pub jacobian: bool,
}

fn parse_point(line: &str) -> Option<Complex> {
    let mut fields = line.split(',').map(str::trim);
    let re = fields.next()?.parse::<f64>().ok()?;
    let im = fields.next()?.parse::<f64>().ok()?;
    (re.is_finite() && im.is_finite()).then(|| Complex::new(re, im))
}

/// Streams `re,im` lines to `re,im,<map>_re,<map>_im,depth,err_bound[,jacobian]`.
/// Extra columns are ignored, a non-numeric first line is taken as a header,
/// blank lines are skipped.
pub fn stream<R: Read, W: Write>(params: &ConstructionParams, opts: &EvalOptions, input: R, out: W) -> Outcome<u64> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = if opts.inverse {
        vec!["re", "im", "inv_re", "inv_im", "depth", "err_bound"]
    } else {
        vec!["re", "im", "phi_re", "phi_im", "depth", "err_bound"]
    };
    if opts.jacobian {
        header.push("jacobian");
    }
    w.write_record(&header)?;
    let mut count = 0;
    for (k, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let Some(z) = parse_point(&line) else {
            if lineno == 1 {
                continue;
            }
            w.flush()?;
            return Err(Failure::Reject(format!("line {lineno}: expected `re,im`, found `{line}`")));
        };
        let r = if opts.inverse {
            phi_inverse(z, params, opts.depth)
        } else {
            phi(z, params, opts.depth)
        };
        let mut row = vec![
            num(z.re),
            num(z.im),
            num(r.value.re),
            num(r.value.im),
            r.depth.to_string(),
            num(r.err_bound),
        ];
        if opts.jacobian {
            let j = if opts.inverse {
                jacobian(r.value, params, opts.depth).map(|j| 1.0 / j)
            } else {
                jacobian(z, params, opts.depth)
            };
            row.push(j.map(num).unwrap_or_default());
        }
        w.write_record(&row)?;
        count += 1;
    }
    w.flush()?;
    Ok(count)
}

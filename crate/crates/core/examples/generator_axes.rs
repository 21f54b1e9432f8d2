//! Scaled atomic QFI at the critical coupling for each collective generator
//! axis, next to the thermodynamic-limit value.

use dicke_core::ground::{boson_gram, solve_ground};
use dicke_core::qfi::{qfi_atomic, GeneratorAxis};
use dicke_core::thermo::qfi_atomic_limit;
use dicke_core::{ModelParams, TruncationSpec};

fn main() -> Result<(), dicke_core::Error> {
    for d in [0.5, 1.0] {
        let template = ModelParams::with_detuning(d, 0.0, 256)?;
        let params = template.with_lambda(template.critical_coupling());
        let state = solve_ground(&params, &TruncationSpec::default())?;
        let rho = boson_gram(&state)?;
        println!("D = {d}, N = {}, limit F_A/N = {:.6}", params.n_atoms, qfi_atomic_limit(&params)?);
        for axis in GeneratorAxis::ALL {
            let f = qfi_atomic(&rho, axis, params.n_atoms)?.value;
            println!("  J_{axis}: F_A/N = {:.6}", f / params.n_atoms as f64);
        }
    }
    Ok(())
}

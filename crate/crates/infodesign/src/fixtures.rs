//! Named (game, structure, contract) triples shipped with the library.

use crate::applications::{bertrand, investment, persuasion, perturbation};
use crate::error::{Error, Result};
use crate::game::{LinearContract, LinearGaussianStructure, QuadraticGame};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub game: QuadraticGame,
    pub structure: LinearGaussianStructure,
    pub contract: LinearContract,
}

pub const NAMES: [&str; 8] = [
    "bertrand-delta0",
    "polarization-n2-selective",
    "polarization-n4-gaussian",
    "comovement-n3-rho2-gaussian",
    "comovement-n3-full-info",
    "investment-n2-selective",
    "investment-n3-gaussian",
    "perturbation-n3-rho2",
];

pub fn by_name(name: &str) -> Result<Fixture> {
    let (game, structure, contract) = match name {
        "bertrand-delta0" => {
            let p = bertrand::MarketParams::example(0.0);
            let opt = bertrand::bertrand_optimum(&p)?;
            (bertrand::bertrand_game(&p)?, opt.structure, opt.contract)
        }
        "polarization-n2-selective" => {
            let p = persuasion::PersuasionParams::polarization(2, 0.5, 1.0);
            (persuasion::polarization_game(&p)?, persuasion::selective_informing(&p, 1)?, persuasion::persuasion_contract(&p))
        }
        "polarization-n4-gaussian" => {
            let p = persuasion::PersuasionParams::polarization(4, 0.5, 1.0);
            (persuasion::polarization_game(&p)?, persuasion::coordinated_gaussian(&p)?, persuasion::persuasion_contract(&p))
        }
        "comovement-n3-rho2-gaussian" => {
            let p = persuasion::PersuasionParams::comovement(3, 1.0, 2.0);
            (persuasion::comovement_game(&p)?, persuasion::coordinated_gaussian(&p)?, persuasion::persuasion_contract(&p))
        }
        "comovement-n3-full-info" => {
            let p = persuasion::PersuasionParams::comovement_ratio(3, 1.0, 3, 5);
            let (s, c) = persuasion::comovement_full_information(&p)?;
            (persuasion::comovement_game(&p)?, s, c)
        }
        "investment-n2-selective" => {
            let p = investment::InvestmentParams::new(2, 1.0, 1.0);
            (investment::investment_game(&p)?, investment::selective_informing(&p, 1)?, investment::investment_contract(&p))
        }
        "investment-n3-gaussian" => {
            let p = investment::InvestmentParams::new(3, 1.0, 1.0);
            (investment::investment_game(&p)?, investment::coordinated_gaussian(&p)?, investment::investment_contract(&p))
        }
        "perturbation-n3-rho2" => {
            let pc = perturbation::perturbed_comovement(3, 2.0, 0.1)?;
            (pc.game, pc.structure, pc.contract)
        }
        other => return Err(Error::InvalidParams(format!("unknown fixture {other:?}"))),
    };
    Ok(Fixture { name: NAMES.iter().find(|n| **n == name).copied().unwrap_or("custom"), game, structure, contract })
}

pub fn all() -> Result<Vec<Fixture>> {
    NAMES.iter().map(|n| by_name(n)).collect()
}

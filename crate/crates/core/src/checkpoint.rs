//! Versioned JSON checkpoints for networks, NE populations and Q-networks.
//!
//! Parameters are stored as the network's flat ordered list (see
//! [`FfnParams`](crate::nets::FfnParams) and
//! [`LstmParams`](crate::nets::LstmParams) for the layouts) next to the
//! dimensions needed to rebuild it.

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::drqn::QNetParams;
use crate::error::{Error, Result};
use crate::nets::{FfnParams, LstmParams, NetParams};
use crate::neuroevolution::Population;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    version: u32,
    body: T,
}

fn check_net(net: &NetParams) -> Result<()> {
    let expected = match net {
        NetParams::Ffn(p) => FfnParams::param_count(p.input_dim(), p.hidden(), p.outputs()),
        NetParams::Lstm(p) => LstmParams::param_count(p.input_dim(), p.hidden(), p.outputs()),
    };
    if net.len() != expected {
        return Err(Error::Checkpoint(format!(
            "{:?} network has {} parameters, layout needs {expected}",
            net.architecture(),
            net.len()
        )));
    }
    Ok(())
}

fn save<T: Serialize>(format: &str, body: &T) -> Result<String> {
    Ok(serde_json::to_string(&Envelope {
        format: format.to_string(),
        version: CHECKPOINT_VERSION,
        body,
    })?)
}

fn load<T: DeserializeOwned>(format: &str, text: &str) -> Result<T> {
    let env: Envelope<serde_json::Value> = serde_json::from_str(text)?;
    if env.format != format {
        return Err(Error::Checkpoint(format!(
            "expected a `{format}` checkpoint, found `{}`",
            env.format
        )));
    }
    if env.version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint version {}",
            env.version
        )));
    }
    Ok(serde_json::from_value(env.body)?)
}

pub fn save_net(net: &NetParams) -> Result<String> {
    save("forage-net", net)
}

pub fn load_net(text: &str) -> Result<NetParams> {
    let net: NetParams = load("forage-net", text)?;
    check_net(&net)?;
    Ok(net)
}

pub fn save_population(pop: &Population) -> Result<String> {
    save("forage-population", pop)
}

pub fn load_population(text: &str) -> Result<Population> {
    let pop: Population = load("forage-population", text)?;
    for g in &pop.genomes {
        check_net(&g.params)?;
    }
    Ok(pop)
}

pub fn save_qnet(q: &QNetParams) -> Result<String> {
    save("forage-qnet", q)
}

pub fn load_qnet(text: &str) -> Result<QNetParams> {
    let q: QNetParams = load("forage-qnet", text)?;
    check_net(&q.net)?;
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drqn::DrqnConfig;
    use crate::nets::{Architecture, NetShape};
    use crate::rng::stream;

    #[test]
    fn population_round_trip() {
        let mut rng = stream(5, 0);
        let mut pop = Population::random(&NetShape::standard(Architecture::Lstm, 4), 30, 1.0, &mut rng);
        pop.genomes[3].update_fitness(0.123456789);
        let text = save_population(&pop).unwrap();
        assert_eq!(load_population(&text).unwrap(), pop);
        assert!(load_net(&text).is_err());
    }

    #[test]
    fn qnet_round_trip() {
        let mut rng = stream(6, 0);
        let net = NetParams::init(&NetShape::standard(Architecture::Ffn, 2), &mut rng);
        let q = QNetParams::new(net, &DrqnConfig::default()).unwrap();
        assert_eq!(load_qnet(&save_qnet(&q).unwrap()).unwrap(), q);
    }

    #[test]
    fn rejects_truncated_params_and_versions() {
        let mut rng = stream(7, 0);
        let net = NetParams::init(&NetShape::standard(Architecture::Ffn, 2), &mut rng);
        let mut v: serde_json::Value = serde_json::from_str(&save_net(&net).unwrap()).unwrap();
        v["body"]["data"].as_array_mut().unwrap().pop();
        assert!(matches!(load_net(&v.to_string()), Err(Error::Checkpoint(_))));
        let mut v: serde_json::Value = serde_json::from_str(&save_net(&net).unwrap()).unwrap();
        v["version"] = 9.into();
        assert!(matches!(load_net(&v.to_string()), Err(Error::Checkpoint(_))));
    }
}

// Parsed run configurations for every subcommand and the code that runs them.

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <sbsim/chainmap.hpp>
#include <sbsim/correlation.hpp>
#include <sbsim/iontrap.hpp>
#include <sbsim/lindblad.hpp>
#include <sbsim/nonmarkov.hpp>
#include <sbsim/spectral.hpp>

#include "sbsim_cli/config.hpp"

namespace sbsim::cli {

// Either `t_end_s` or `t_end_natural` (in units of 1/Δ), plus `steps`.
struct TimeGrid {
    double t_end{0.0};  // seconds, resolved
    std::size_t steps{0};

    std::vector<double> times() const;
};

struct SdConfig {
    spectral::CompositeSpectralDensity density;
    double hbar_beta{0.0};
    double omega_min{0.0};
    double omega_max{0.0};
    std::size_t points{0};
};

struct SdFitConfig {
    std::optional<spectral::TargetSpectralDensity> target;
    std::size_t n_components{1};
    std::vector<spectral::LorentzianComponent> seeds;
    std::size_t grid_points{2000};
    spectral::FitOptions options;
};

struct CorrConfig {
    correlation::BathParams bath;
    TimeGrid grid;
};

struct CorrDistConfig {
    double omega_m{0.0};
    std::vector<double> kappas;
    std::vector<double> nbars;
    std::size_t n_matsubara{10000};
};

struct SimulateConfig {
    lindblad::SystemSpec system;
    Eigen::Matrix2cd spin0;
    TimeGrid grid;
    lindblad::EvolveOptions evolve;
    bool truncation_audit{false};
    std::size_t audit_extra{5};
};

struct MeasureGrid {
    TimeGrid grid;
    double threshold{nonmarkov::default_threshold};
};

struct NonmarkovConfig {
    lindblad::SystemSpec system;
    lindblad::EvolveOptions evolve;
    std::optional<MeasureGrid> rhp;
    std::optional<MeasureGrid> blp;
    std::vector<nonmarkov::StatePair> pairs;
};

struct IonParamsConfig {
    iontrap::TwoIonCrystal crystal;
    iontrap::RamanLasers lasers;
    std::size_t spin_ion{1};
    double spin_ion_mass{25.0};
    std::size_t mode{2};  // 1 or 2: the mode that plays the bath oscillator
    std::optional<iontrap::RabiTable> rabi;
    double gamma_up{0.0};
    double gamma_down{0.0};
    double kappa{0.0};
    double nbar{0.0};
};

struct ChainConfig {
    spectral::CompositeSpectralDensity density;
    double omega_max{0.0};
    std::size_t n_nodes{2000};
    std::size_t n_chain{15};
    chainmap::DiscretizationOptions discretization;
};

struct ChainEvolveConfig {
    ChainConfig chain;
    lindblad::SpinParams spin;
    Eigen::Vector2cd spin0;
    TimeGrid grid;
    chainmap::ChainEvolutionOptions evolution;
};

using RunConfig = std::variant<SdConfig, SdFitConfig, CorrConfig, CorrDistConfig, SimulateConfig,
                               NonmarkovConfig, IonParamsConfig, ChainConfig, ChainEvolveConfig>;

const std::vector<std::string>& subcommands();

// Throws ConfigError with every schema problem found.
RunConfig parse_config(const std::string& subcommand, const json& document, ParseLog& log);
RunConfig parse_config(const std::string& subcommand, const json& document);

// Regime checks that apply to the configuration (possibly none).
std::vector<std::pair<std::string, iontrap::RegimeReport>> regime_reports(const RunConfig& config);

struct OutputContext {
    std::filesystem::path dir;
    std::vector<std::string> comments;  // reproducibility block for every file
    std::size_t threads{1};
    bool acknowledge_cap{false};
    std::ostream* log{nullptr};
};

// Writes the subcommand's files into ctx.dir.
void execute(const RunConfig& config, const OutputContext& ctx);

}  // namespace sbsim::cli

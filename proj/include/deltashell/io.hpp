#pragma once

#include "deltashell/analysis.hpp"
#include "deltashell/experiment.hpp"
#include "deltashell/poles.hpp"
#include "deltashell/propagator.hpp"
#include "deltashell/tdse.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deltashell {

using json = nlohmann::ordered_json;

std::string_view version();

/// 64-bit FNV-1a, printed as 16 hex digits.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t h);

/// What produced an output file. `config` is the full effective run config;
/// its compact dump is what gets hashed.
struct Provenance {
    std::string command;
    json config = json::object();

    std::string config_hash() const;
    /// Comment lines ("# key: value") placed at the top of every CSV.
    std::string csv_header() const;
    json to_json() const;
};

/// %.17g, with nan / inf spelled out.
std::string fmt(double v);

// Config (de)serialization. Missing keys keep their defaults; unknown keys
// raise DomainError so that typos do not silently change a run.

json to_json(const QuadratureConfig& c);
json to_json(const PoleSumConfig& c);
json to_json(const PropagatorConfig& c);
json to_json(const ExponentialWindow& w);
json to_json(const PowerLawWindow& w);
json to_json(const TdseConfig& c);

void from_json(const json& j, QuadratureConfig& c);
void from_json(const json& j, PoleSumConfig& c);
void from_json(const json& j, PropagatorConfig& c);
void from_json(const json& j, ExponentialWindow& w);
void from_json(const json& j, PowerLawWindow& w);
void from_json(const json& j, TdseConfig& c);

// Survival series: t, t_over_tau0, p_total, p_bg, p_poles, p_interf, err_est
// and, when tau_fit is given, a trailing t_over_tau_fit.

std::string survival_csv(const SurvivalSeries& s, const Provenance& prov, std::optional<double> tau_fit = {});
json survival_json(const SurvivalSeries& s, const Provenance& prov, std::optional<double> tau_fit = {});

/// n, re_k, im_k, gamma, tau_over_tau0, q_value, residual (physical k).
std::string poles_csv(std::span<const Pole> poles, const ModelParams& params, const Provenance& prov);
json poles_json(std::span<const Pole> poles, const ModelParams& params, const Provenance& prov);

/// x, re_psi, im_psi.
std::string snapshot_csv(std::span<const double> x, std::span<const cplx> values, double time,
                         const Provenance& prov);

json fit_json(const FitResult& f);
/// t, p, model, log_residual over the fitted window.
std::string fit_residuals_csv(std::span<const double> t, std::span<const double> p, const FitResult& f,
                              const Provenance& prov);

json regime_json(const RegimeReport& r);
json tdse_json(const TdseValidation& v, const Provenance& prov);
json scan_json(const ScanResult& r, const Provenance& prov);

/// Plain column-aligned text table.
class TextTable {
public:
    explicit TextTable(std::vector<std::string> header);
    void add(std::vector<std::string> row);
    std::string str() const;

private:
    std::vector<std::vector<std::string>> rows_;
};

/// Writes text to path, creating parent directories; throws Error on failure.
void write_text(const std::string& path, std::string_view text);

} // namespace deltashell

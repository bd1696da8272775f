#include "hetpol/model.hpp"

#include <cmath>

#include <json.hpp>

#include "hetpol/rng.hpp"

namespace hetpol {

void ModelParams::validate() const {
    HETPOL_REQUIRE(std::isfinite(lambda) && lambda >= 0.0, "lambda must be finite and >= 0");
    HETPOL_REQUIRE(std::isfinite(h), "h must be finite");
    HETPOL_REQUIRE(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
    HETPOL_REQUIRE(d >= 1, "d must be >= 1");
    HETPOL_REQUIRE(n >= 1, "n must be >= 1");
}

Disorder::Disorder(std::uint64_t seed, double p, std::vector<std::int8_t> omega, std::vector<std::int8_t> eta)
    : seed_(seed), p_(p), omega_(std::move(omega)), eta_(std::move(eta)) {
    HETPOL_REQUIRE(omega_.size() == eta_.size(), "omega and eta must have equal length");
    for (std::size_t i = 0; i < omega_.size(); ++i) {
        HETPOL_REQUIRE(omega_[i] == 1 || omega_[i] == -1, "omega entries must be +1 or -1");
        HETPOL_REQUIRE(eta_[i] == 1 || eta_[i] == -1, "eta entries must be +1 or -1");
    }
}

int Disorder::omega_at(int i) const {
    if (i < 1 || i > n()) throw InvalidArgument("disorder time index " + std::to_string(i) + " out of range");
    return omega_[static_cast<std::size_t>(i - 1)];
}

int Disorder::eta_at(int i) const {
    if (i < 1 || i > n()) throw InvalidArgument("disorder time index " + std::to_string(i) + " out of range");
    return eta_[static_cast<std::size_t>(i - 1)];
}

DisorderView Disorder::view(int offset) const { return view(offset, n() - offset); }

DisorderView Disorder::view(int offset, int length) const {
    HETPOL_REQUIRE(offset >= 0 && length >= 0 && offset + length <= n(), "disorder window out of range");
    const auto o = static_cast<std::size_t>(offset);
    const auto l = static_cast<std::size_t>(length);
    return {std::span(omega_).subspan(o, l), std::span(eta_).subspan(o, l)};
}

std::string Disorder::to_json() const {
    nlohmann::json j;
    j["seed"] = seed_;
    j["n"] = n();
    j["p"] = p_;
    j["omega"] = omega_;
    j["eta"] = eta_;
    return j.dump();
}

Disorder Disorder::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed disorder JSON: ") + e.what());
    }
    try {
        auto omega = j.at("omega").get<std::vector<std::int8_t>>();
        auto eta = j.at("eta").get<std::vector<std::int8_t>>();
        HETPOL_REQUIRE(j.at("n").get<int>() == static_cast<int>(omega.size()), "disorder JSON: n does not match omega length");
        return Disorder(j.at("seed").get<std::uint64_t>(), j.at("p").get<double>(), std::move(omega), std::move(eta));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("disorder JSON: ") + e.what());
    }
}

Disorder sample_disorder(const ModelParams& params, std::uint64_t seed) {
    params.validate();
    const auto n = static_cast<std::size_t>(params.n);
    std::vector<std::int8_t> omega(n);
    std::vector<std::int8_t> eta(n);
    Rng omega_rng(seed, 0, StreamTag::omega);
    Rng eta_rng(seed, 0, StreamTag::eta);
    for (std::size_t i = 0; i < n; ++i) {
        omega[i] = static_cast<std::int8_t>(omega_rng.sign());
        eta[i] = eta_rng.uniform() < params.p ? 1 : -1;
    }
    return Disorder(seed, params.p, std::move(omega), std::move(eta));
}

int delta(const Disorder& disorder, int i, bool at_origin) {
    const int eta = disorder.eta_at(i);
    return (at_origin && eta == 1) ? -1 : 1;
}

}  // namespace hetpol

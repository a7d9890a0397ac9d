#include <algorithm>
#include <string>
#include <type_traits>

#include "fedcvr/error.hpp"
#include "fedcvr/policies/policy.hpp"

namespace fedcvr::policies {

namespace {
template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;
}  // namespace

std::string_view variant_name(const PolicyConfig& cfg) {
  return std::visit(Overloaded{
                        [](const UniformConfig&) { return std::string_view("uniform"); },
                        [](const PowerOfChoiceConfig&) { return std::string_view("power_of_choice"); },
                        [](const ActiveFlConfig&) { return std::string_view("active_fl"); },
                        [](const FedCvrConfig&) { return std::string_view("fedcvr_bolt"); },
                    },
                    cfg);
}

void validate(const PolicyConfig& cfg, std::size_t clients, std::size_t participants) {
  if (participants == 0 || participants > clients) throw ConfigError("policy: need 1 <= P <= K");
  std::visit(Overloaded{
                 [](const UniformConfig&) {},
                 [&](const PowerOfChoiceConfig& c) {
                   const std::size_t d = c.candidates == 0 ? 2 * participants : c.candidates;
                   if (d < participants) throw ConfigError("policy.candidates must be >= P");
                   if (d > clients && c.candidates != 0) throw ConfigError("policy.candidates must be <= K");
                 },
                 [](const ActiveFlConfig& c) {
                   if (!(c.alpha1 >= 0.0 && c.alpha1 < 1.0)) throw ConfigError("policy.alpha1 must lie in [0, 1)");
                   if (!(c.alpha2 >= 0.0)) throw ConfigError("policy.alpha2 must be >= 0");
                   if (!(c.alpha3 >= 0.0 && c.alpha3 <= 1.0)) throw ConfigError("policy.alpha3 must lie in [0, 1]");
                 },
                 [](const FedCvrConfig& c) {
                   if (!(c.beta >= 0.0)) throw ConfigError("policy.beta must be >= 0");
                   if (!(c.kernel.gamma > 0.0)) throw ConfigError("policy.kernel_gamma must be > 0");
                   if (c.kmeans_iters == 0) throw ConfigError("policy.kmeans_iters must be >= 1");
                 },
             },
             cfg);
}

bool Policy::needs_losses() const noexcept {
  return std::holds_alternative<PowerOfChoiceConfig>(cfg_) || std::holds_alternative<ActiveFlConfig>(cfg_);
}

SelectionDecision Policy::select(const RoundContext& ctx, CounterRng& rng) {
  const std::size_t k = ctx.alpha ? ctx.alpha->size() : ctx.client_losses.size();
  return std::visit(
      Overloaded{
          [&](const UniformConfig&) { return select_uniform(k, ctx.participants, rng); },
          [&](const PowerOfChoiceConfig& c) {
            // Small federations cap the default 2P pool at K.
            const std::size_t d = c.candidates == 0 ? std::min(2 * ctx.participants, k) : c.candidates;
            return select_power_of_choice(ctx.client_losses, *ctx.alpha, d, ctx.participants, rng);
          },
          [&](const ActiveFlConfig& c) {
            return select_active_fl(ctx.client_losses, c.alpha1, c.alpha2, c.alpha3, ctx.participants, rng,
                                    &considered_);
          },
          [&](const FedCvrConfig& c) {
            if (!ctx.stack || !ctx.tracked_params || !ctx.alpha) {
              throw Error("fedcvr policy needs the covariance stack, tracked parameters and weights");
            }
            return select_fedcvr(*ctx.stack, *ctx.tracked_params, *ctx.alpha, ctx.round, c, ctx.participants, rng);
          },
      },
      cfg_);
}

}  // namespace fedcvr::policies

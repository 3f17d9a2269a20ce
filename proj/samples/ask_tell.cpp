// Minimal ask/tell loop on a mixed search space.

#include <cmath>
#include <iostream>

#include "atpe/atpe.hpp"

int main() {
  const auto space = atpe::space_from_json(nlohmann::json::parse(R"({"params":[
    {"name":"learning_rate","kind":"continuous","lower":1e-5,"upper":1e-1,"scale":"log"},
    {"name":"layers","kind":"integer","lower":1,"upper":8},
    {"name":"activation","kind":"categorical","choices":["relu","tanh","gelu"]}]})"));

  atpe::OptimizerSession session(space, atpe::Variant::atpe_c, 7);
  for (int step = 0; step < 60; ++step) {
    const auto config = session.ask();
    const double lr = std::get<double>(config[0]);
    const double layers = static_cast<double>(std::get<std::int64_t>(config[1]));
    const auto act = std::get<atpe::Choice>(config[2]).index;
    const double loss = std::pow(std::log10(lr) + 3.0, 2) + 0.1 * std::pow(layers - 4.0, 2) + (act == 2 ? 0.0 : 0.5);
    session.tell(config, loss);
  }
  const auto& best = *session.incumbent();
  std::cout << "best loss " << best.loss << " at " << atpe::config_to_json(best.config, space).dump() << "\n";
}

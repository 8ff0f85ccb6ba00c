#include <iostream>
#include <map>

#include "commands.hpp"
#include "cocopnp/errors.hpp"

int main(int argc, char** argv) {
  using namespace cocopnp::cli;

  CLI::App app{"cocopnp: plug-and-play Poisson restoration with CoCo denoisers"};
  app.set_version_flag("--version", version());
  app.set_config("--config", "", "INI file; [command] sections, flags win");
  app.require_subcommand(1);

  std::map<std::string, Action> actions{
      {"simulate", add_simulate(app)}, {"restore", add_restore(app)},
      {"sweep", add_sweep(app)},       {"certify", add_certify(app)},
      {"train", add_train(app)},       {"theory", add_theory(app)}};

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    for (const CLI::App* sub : app.get_subcommands()) actions.at(sub->get_name())();
  } catch (const cocopnp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const cocopnp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitOk;
}

#include <iostream>

#include "common.hpp"
#include "langdist/error.hpp"

int main(int argc, char** argv) {
  using langdist::cli::Context;
  using langdist::cli::Json;

  CLI::App app{"langdist: syntactic distance between languages from contextual embeddings"};
  app.name("langdist");
  app.require_subcommand(1);
  app.fallthrough();
  Context ctx;
  app.add_option("--seed", ctx.seed, "Seed for every random substream")
      ->envname("LANGDIST_SEED")
      ->capture_default_str();
  app.add_option("--jobs", ctx.jobs, "Worker threads (0 = all logical cores)")
      ->envname("LANGDIST_JOBS")
      ->capture_default_str();
  langdist::cli::register_data_commands(app, ctx);
  langdist::cli::register_distance_commands(app, ctx);
  langdist::cli::register_analysis_commands(app, ctx);
  langdist::cli::register_regress_commands(app, ctx);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  auto fail = [](const char* kind, const std::string& message) {
    Json err;
    err["error"] = kind;
    err["message"] = message;
    std::cerr << err.dump() << "\n";
    return 1;
  };
  try {
    const Json summary = ctx.action();
    std::cout << summary.dump(2) << "\n";
    return ctx.exit_code;
  } catch (const langdist::Error& e) {
    return fail(e.kind(), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail("format_error", e.what());
  } catch (const std::exception& e) {
    return fail("error", e.what());
  }
}

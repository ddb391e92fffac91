#include "commands.hpp"

#include "cantorlab/error.hpp"

#include <iostream>
#include <memory>

int main(int argc, char** argv) {
    CLI::App app{"Cantor-set and Lusin-graph laboratory"};
    app.require_subcommand(1);
    const auto commands = cli::all_commands();
    std::vector<std::unique_ptr<cli::Options>> options;
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        options.push_back(std::make_unique<cli::Options>(c.name, c.specs));
        subs.push_back(app.add_subcommand(c.name, c.help));
        options.back()->attach(*subs.back());
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        try {
            auto& o = *options[i];
            o.resolve();
            auto outcome = commands[i].run(o);
            outcome.report.command = commands[i].name;
            const std::string text =
                o.text("format") == "json" ? cli::to_json_text(outcome.report) : cli::to_csv(outcome.report);
            const std::string path = outcome.report_path ? *outcome.report_path
                                     : o.has("out")     ? o.text("out")
                                                        : std::string();
            if (!outcome.artifact_path.empty()) cli::emit(outcome.artifact, outcome.artifact_path);
            cli::emit(text, path);
            if ((o.flag("check") || commands[i].always_check) && !outcome.violations.empty()) {
                for (const auto& v : outcome.violations) std::cerr << "invariant violated: " << v << "\n";
                return 4;
            }
            return 0;
        } catch (const cantorlab::InvalidArgument& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        } catch (const cantorlab::NumericFailure& e) {
            std::cerr << "numeric failure: " << e.what() << "\n";
            return 3;
        } catch (const std::exception& e) {
            std::cerr << "numeric failure: " << e.what() << "\n";
            return 3;
        }
    }
    return 2;
}

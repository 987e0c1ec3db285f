#include <iostream>

#include "commands.hpp"
#include <nlohmann/json.hpp>

#include "ttm/common/error.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Time-to-Move: motion-guided video generation from warped references"};
    app.require_subcommand(1);
    ttm::cli::add_commands(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ttm::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

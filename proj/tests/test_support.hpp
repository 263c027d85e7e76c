#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sqlgen::testing {

std::filesystem::path fixtures_dir();
std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct CmdResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

// Runs the sqlgen command-line tool with the given arguments.
CmdResult run_cli(const std::vector<std::string>& args, const std::string& env_prefix = {});

// Builds the three-table SQLite fixture database at `path` from fixtures/db/fixture.sql.
void build_fixture_db(const std::filesystem::path& path);

// Executes a SQL script against a new SQLite database file.
void build_sqlite_db(const std::filesystem::path& path, const std::string& script);

}  // namespace sqlgen::testing

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "airig/json_io.hpp"
#include "airig/trace.hpp"

#include <filesystem>
#include <sstream>

using namespace airig;

TEST_CASE("trace CSV round trip keeps every digit") {
  std::vector<IterRecord> recs;
  for (int k = 0; k < 5; ++k) {
    recs.push_back({k, 1.0 / 3.0 + k, 1e-300 * k, -2.5e17, 0.1, 1.0 / std::sqrt(k + 1.0), 0.7, 0.001 * k});
  }
  const std::string text = trace_csv(recs);
  CHECK(text.rfind(std::string(kTraceHeader) + "\n", 0) == 0);
  std::istringstream in(text);
  const auto back = read_trace_csv(in);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].k == recs[i].k);
    CHECK(back[i].f_bar == recs[i].f_bar);
    CHECK(back[i].phi_bar == recs[i].phi_bar);
    CHECK(back[i].f_last == recs[i].f_last);
    CHECK(back[i].gamma_k == recs[i].gamma_k);
    CHECK(back[i].elapsed == recs[i].elapsed);
  }
}

TEST_CASE("malformed traces name the line") {
  auto fails_with = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      read_trace_csv(in, "t.csv");
    } catch (const ContractViolation& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  const std::string h = std::string(kTraceHeader) + "\n";
  CHECK(fails_with("", "empty"));
  CHECK(fails_with("k,f\n", "t.csv:1"));
  CHECK(fails_with(h + "0,1,2,3,4,5,6,7\n1,1,2,x,4,5,6,7\n", "t.csv:3"));
  CHECK(fails_with(h + "0,1,2,3\n", "t.csv:2"));
  CHECK(fails_with(h + "0,1,2,3,4,5,6,7,8\n", "t.csv:2"));
}

TEST_CASE("atomic file writes") {
  const auto dir = std::filesystem::temp_directory_path() / "airig_trace_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  const std::string path = (dir / "t.csv").string();
  json_io::write_file_atomic(path, trace_csv({{0, 1, 2, 3, 4, 5, 6, 7}}));
  CHECK(read_trace_file(path).size() == 1);
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  CHECK_THROWS_AS(read_trace_file((dir / "missing.csv").string()), ContractViolation);
  std::filesystem::remove_all(dir.parent_path());
}

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "json.hpp"

#include "opart/partitioner.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace opart;
using opart::test::class_of;
using opart::test::data_path;
using opart::test::read_text;

namespace {

const char* kCartSchema = R"(-- opart-schema v1
TABLE SC (ID, I_ID, QTY) KEY (ID);
)";

const char* kCartTemplates = R"(-- opart-templates v1
TXN createCart(sid) { INSERT INTO SC (ID) VALUES (sid); }
TXN doCart(sid, iid, q) { UPDATE SC SET QTY = q WHERE ID = sid AND I_ID = iid; }
)";

std::vector<TransactionTemplate> derived(const std::string& templates, const std::string& schema) {
  Schema s = parse_schema(schema);
  std::vector<TransactionTemplate> out;
  for (auto& t : parse_template_file(templates)) out.push_back(derive_access_sets(std::move(t), s));
  return out;
}

PartitionResult partition_files(const std::string& dir, std::size_t max_params = 1) {
  PartitionOptions o;
  o.optimize.max_params_per_txn = max_params;
  return run_partitioning(parse_template_file(read_text(data_path(dir + "/templates.txn"))),
                          parse_schema(read_text(data_path(dir + "/schema.sql"))), o);
}

std::set<std::string> atoms_of(const Conjunction& c) {
  std::set<std::string> out;
  for (const auto& a : c.atoms) out.insert(to_string(a));
  return out;
}

}  // namespace

TEST(Partitioner, CartExampleConflictCondition) {
  auto ts = derived(kCartTemplates, kCartSchema);
  DetectOptions all;
  all.skip_unobservable_writes = false;
  auto records = detect_conflicts(ts, all);
  const ConflictRecord* cross = nullptr;
  for (const auto& r : records) {
    if (r.first == "createCart" && r.second == "doCart") {
      ASSERT_EQ(cross, nullptr);
      cross = &r;
    }
  }
  ASSERT_NE(cross, nullptr);
  EXPECT_EQ(cross->kind, ConflictKind::WriteWrite);
  ASSERT_EQ(cross->condition.clauses.size(), 1u);
  EXPECT_EQ(atoms_of(cross->condition.clauses[0]),
            (std::set<std::string>{"SC.ID = sid", "SC.ID = sid'", "SC.I_ID = iid'"}));

  EXPECT_FALSE(survives(*cross, {"sid"}, {"sid"}));
  EXPECT_TRUE(survives(*cross, {"sid"}, {"iid"}));
  EXPECT_TRUE(survives(*cross, {}, {"sid"}));

  std::vector<ConflictRecord> only{*cross};
  PartitioningArray p{{{"createCart", {"sid"}}, {"doCart", {"sid"}}}};
  EXPECT_DOUBLE_EQ(cost(p, only, ts), 0.0);
  EXPECT_DOUBLE_EQ(cost(PartitioningArray{}, only, ts), 2.0);
}

TEST(Partitioner, DisjointTablesDoNotConflict) {
  auto ts = derived("-- opart-templates v1\nTXN a(x) { UPDATE T1 SET A = 1 WHERE K = x; }\n"
                    "TXN b(x) { SELECT C FROM T2 WHERE K = x; }\n",
                    oracle::random_app_schema());
  // a conflicts only with itself, b with nobody.
  auto records = detect_conflicts(ts, DetectOptions{false});
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].first, "a");
  EXPECT_EQ(records[0].second, "a");
  EXPECT_TRUE(detect_conflicts(ts).empty());
  EXPECT_DOUBLE_EQ(cost(PartitioningArray{}, {}, ts), 0.0);
}

TEST(Partitioner, DetectMatchesEntryPairOracle) {
  std::mt19937_64 gen(99);
  for (int round = 0; round < 60; ++round) {
    auto ts = derived(oracle::random_app(gen), oracle::random_app_schema());
    for (bool skip : {true, false}) {
      auto got = detect_conflicts(ts, DetectOptions{skip});
      auto want = oracle::conflicts(ts, skip);
      ASSERT_EQ(got.size(), want.size()) << "round " << round;
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].first, want[i].first);
        EXPECT_EQ(got[i].second, want[i].second);
        EXPECT_EQ(got[i].kind, want[i].kind);
      }
    }
  }
}

TEST(Partitioner, CostMatchesReevaluationOracle) {
  std::mt19937_64 gen(5);
  for (int round = 0; round < 40; ++round) {
    auto ts = derived(oracle::random_app(gen), oracle::random_app_schema());
    ts.resize(3);
    auto records = detect_conflicts(ts);
    auto oracle_records = oracle::conflicts(ts);
    const std::vector<std::vector<std::string>> opts{{}, {"x"}, {"y"}};
    for (const auto& a : opts) {
      for (const auto& b : opts) {
        for (const auto& c : opts) {
          PartitioningArray p{{{"t0", a}, {"t1", b}, {"t2", c}}};
          EXPECT_DOUBLE_EQ(cost(p, records, ts), oracle::cost(ts, oracle_records, p.assignment));
        }
      }
    }
  }
}

TEST(Partitioner, OptimizerMatchesBruteForce) {
  std::mt19937_64 gen(1234);
  for (int round = 0; round < 50; ++round) {
    auto ts = derived(oracle::random_app(gen), oracle::random_app_schema());
    auto records = detect_conflicts(ts);
    PartitioningArray p = optimize_partitioning(ts, records);
    EXPECT_DOUBLE_EQ(cost(p, records, ts), oracle::brute_force_min_cost(ts, oracle::conflicts(ts)));
    EXPECT_EQ(optimize_partitioning(ts, records), p);
  }
}

TEST(Partitioner, NoConflictTieBreakIsNoParameter) {
  auto ts = derived("-- opart-templates v1\nTXN solo(x, y) { SELECT A FROM T1 WHERE K = x; }\n",
                    oracle::random_app_schema());
  PartitioningArray p = optimize_partitioning(ts, detect_conflicts(ts));
  EXPECT_TRUE(p.of("solo").empty());
}

TEST(Partitioner, SearchCapEnforced) {
  std::mt19937_64 gen(3);
  auto ts = derived(oracle::random_app(gen), oracle::random_app_schema());
  OptimizeOptions o;
  o.max_candidates = 2;
  EXPECT_THROW((void)optimize_partitioning(ts, detect_conflicts(ts), o), SearchCapExceeded);
  EXPECT_EQ(raw_search_space(ts, OptimizeOptions{}), static_cast<std::uint64_t>(std::pow(3, ts.size())));
}

TEST(Partitioner, MiniStoreClassification) {
  auto start = std::chrono::steady_clock::now();
  auto r = partition_files("workloads/ministore");
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(1));
  EXPECT_EQ(class_of(r.report, "order").op_class, OpClass::Global);
  EXPECT_EQ(class_of(r.report, "createCart").op_class, OpClass::Local);
  EXPECT_EQ(class_of(r.report, "addToCart").op_class, OpClass::Local);
  for (const char* t : {"order", "createCart", "addToCart"}) {
    EXPECT_EQ(class_of(r.report, t).parameters, std::vector<std::string>{"c"}) << t;
  }
}

TEST(Partitioner, TpcwGoldenCounts) {
  auto r = partition_files("workloads/tpcw");
  ClassCounts c = r.report.counts();
  EXPECT_EQ(c.local, 10);
  EXPECT_EQ(c.global, 5);
  EXPECT_EQ(c.commutative, 5);
  EXPECT_EQ(c.local_or_global, 0);
  EXPECT_EQ(c.total, 20);
  EXPECT_EQ(c.read_only, 13);
}

TEST(Partitioner, RubisBidIsDualKey) {
  auto r = partition_files("workloads/rubis", 2);
  const auto& bid = class_of(r.report, "bid");
  EXPECT_EQ(bid.op_class, OpClass::LocalOrGlobal);
  EXPECT_EQ(bid.parameters, (std::vector<std::string>{"u", "i"}));
  EXPECT_EQ(r.report.counts().local, 6);
  EXPECT_EQ(r.report.counts().commutative, 1);
}

TEST(Partitioner, UnsoundDualKeyIsDemoted) {
  // A bid that also reads the item row: a global instance routed by u would
  // read an item row that another server owns.
  const char* schema = R"(-- opart-schema v1
TABLE USERS (ID, NB) KEY (ID);
TABLE ITEMS (ID, MAX_BID) KEY (ID);
)";
  const char* templates = R"(-- opart-templates v1
TXN viewItem(i) { SELECT MAX_BID FROM ITEMS WHERE ID = i; }
TXN viewUser(u) { SELECT NB FROM USERS WHERE ID = u; }
TXN bid(u, i, a) {
  SELECT MAX_BID FROM ITEMS WHERE ID = i;
  UPDATE ITEMS SET MAX_BID = a WHERE ID = i;
  UPDATE USERS SET NB = NB + 1 WHERE ID = u;
}
)";
  PartitionOptions o;
  o.optimize.max_params_per_txn = 2;
  auto r = run_partitioning(parse_template_file(templates), parse_schema(schema), o);
  const auto& bid = class_of(r.report, "bid");
  EXPECT_EQ(bid.op_class, OpClass::Global);
  EXPECT_EQ(bid.parameters.size(), 1u);
  EXPECT_EQ(r.partitioning.of("bid"), bid.parameters);
}

TEST(Partitioner, LoggingTransactionIsCommutative) {
  const char* schema = "-- opart-schema v1\nTABLE LOG (ID, MSG) KEY (ID);\nTABLE T (K, V) KEY (K);\n";
  const char* templates =
      "-- opart-templates v1\nTXN log(x, m) { INSERT INTO LOG (ID, MSG) VALUES (x, m); }\n"
      "TXN get(k) { SELECT V FROM T WHERE K = k; }\nTXN put(k) { UPDATE T SET V = 1 WHERE K = k; }\n";
  auto r = run_partitioning(parse_template_file(templates), parse_schema(schema));
  EXPECT_EQ(class_of(r.report, "log").op_class, OpClass::Commutative);
  EXPECT_TRUE(class_of(r.report, "log").parameters.empty());
  EXPECT_EQ(class_of(r.report, "get").op_class, OpClass::Local);
  EXPECT_EQ(class_of(r.report, "put").op_class, OpClass::Local);
  EXPECT_DOUBLE_EQ(r.report.total_cost, 0.0);
}

TEST(Partitioner, MonotoneInConflicts) {
  std::mt19937_64 gen(77);
  auto ts = derived(oracle::random_app(gen), oracle::random_app_schema());
  auto records = detect_conflicts(ts);
  PartitioningArray p = optimize_partitioning(ts, records);
  for (std::size_t k = 0; k < records.size(); ++k) {
    std::vector<ConflictRecord> prefix(records.begin(), records.begin() + static_cast<long>(k));
    std::vector<ConflictRecord> longer(records.begin(), records.begin() + static_cast<long>(k + 1));
    EXPECT_LE(cost(p, prefix, ts), cost(p, longer, ts));
  }
}

TEST(Partitioner, WeightsAndReports) {
  auto w = parse_weights(R"({"format": "opart-weights/1", "weights": {"order": 3, "createCart": 0.5}})");
  EXPECT_DOUBLE_EQ(w.at("order"), 3.0);
  EXPECT_THROW((void)parse_weights(R"({"format": "other", "weights": {}})"), std::exception);
  EXPECT_THROW((void)parse_weights("not json"), std::exception);

  PartitionOptions o;
  o.weights = w;
  auto r = run_partitioning(parse_template_file(read_text(data_path("workloads/ministore/templates.txn"))),
                            parse_schema(read_text(data_path("workloads/ministore/schema.sql"))), o);
  EXPECT_DOUBLE_EQ(class_of(r.report, "order").weight, 3.0);
  auto json = nlohmann::json::parse(report_to_json(r.report, r.partitioning));
  EXPECT_TRUE(json.is_object());
  std::string table = report_to_table(r.report, "ministore");
  EXPECT_NE(table.find("ministore"), std::string::npos);
  EXPECT_NE(table.find("Read-only"), std::string::npos);
  EXPECT_EQ(op_class_from_string(to_string(OpClass::LocalOrGlobal)), OpClass::LocalOrGlobal);
}

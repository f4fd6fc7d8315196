#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <memory>
#include <queue>

#include "json.hpp"
#include "opart/sim.hpp"

namespace opart {

namespace {

std::int64_t to_us(double ms) { return std::llround(ms * 1000.0); }

struct Job {
  enum Kind { Op, Apply } kind = Op;
  int server = 0;
  std::uint64_t op_id = 0;
  int client = -1;
  OpClass op_class = OpClass::Local;
  bool in_batch = false;
  std::unique_ptr<OpRunner> runner;
  std::int64_t step_us = 0;
  int attempts = 0;
  bool began = false;
};

struct Client {
  int id = 0;
  int site = 0;
  int home = 0;
  bool busy = false;
  std::uint64_t op = 0;
  std::int64_t issued_us = 0;
  std::string txn;
  Args args;
};

struct Server {
  int id = 0;
  int site = 0;
  std::unique_ptr<Engine> engine;
  PendingQueue q;
  UpdateQueue u{true};
  int free_cores = 0;
  std::deque<std::uint64_t> ready;
  std::vector<std::uint64_t> parked;
  std::uint64_t seen_wake = 0;
  std::size_t jobs = 0;

  bool holding = false;
  Token token;
  std::vector<TokenEntry> to_apply;
  std::size_t apply_next = 0;
  std::size_t batch_left = 0;
  std::int64_t recv_us = 0;
  std::int64_t last_recv_us = -1;

  std::uint64_t epochs = 0;
  double hold_total_ms = 0.0;
  double max_gap_ms = 0.0;
};

struct Completion {
  std::int64_t issued_us = 0;
  std::int64_t done_us = 0;
  OpClass op_class = OpClass::Local;
  bool error = false;
};

struct Scheduled {
  std::int64_t t = 0;
  std::uint64_t seq = 0;
  std::function<void()> fn;
  bool operator>(const Scheduled& o) const { return t != o.t ? t > o.t : seq > o.seq; }
};

class Simulation {
 public:
  explicit Simulation(const SimConfig& cfg)
      : cfg_(cfg), spec_(cfg.spec), rng_(cfg.spec.seed), n_(cfg.servers) {
    if (n_ < 1) throw ConfigError("server count must be at least 1");
    cfg_.latency.validate();
    spec_.validate();
    partition_ = cfg.partition ? *cfg.partition : partition_workload(spec_);
    router_ = std::make_unique<Router>(partition_.report.transactions, n_);
    for (const auto& t : partition_.templates) templates_[t.name] = &t;
    mix_ = spec_.effective_mix();

    Database db = initial_database(spec_);
    std::string dump = db.dump();
    const int sites = cfg_.latency.size();
    for (int i = 0; i < n_; ++i) {
      auto s = std::make_unique<Server>();
      s->id = i;
      // Extra servers share sites in contiguous blocks so the ring crosses each WAN link once.
      s->site = n_ <= sites ? i : i * sites / n_;
      s->engine = std::make_unique<Engine>(db);
      s->free_cores = spec_.cores;
      servers_.push_back(std::move(s));
    }

    int client_sites = spec_.clients_at_all_sites ? sites : std::min(n_, sites);
    for (int site = 0; site < client_sites; ++site) {
      for (int k = 0; k < spec_.clients_per_site; ++k) {
        Client c;
        c.id = static_cast<int>(clients_.size());
        c.site = site;
        c.home = nearest_server(site, k);
        clients_.push_back(std::move(c));
      }
    }
    build_home_keys();

    TraceHeader& h = trace_.header;
    h.servers = n_;
    h.seed = spec_.seed;
    h.scenario = cfg_.scenario;
    h.schema = spec_.schema_text;
    h.templates = spec_.templates_text;
    h.initial_dump = dump;
    h.classes = partition_.report.transactions;
  }

  SimResult run() {
    at(0, [this] { on_token(0, Token{}); });
    for (auto& c : clients_) {
      int id = c.id;
      at(0, [this, id] { issue(id); });
    }
    at(to_us(spec_.duration_ms), [this] { stop(); });
    const std::int64_t limit = to_us(spec_.duration_ms) + to_us(3'600'000.0);
    while (!events_.empty()) {
      Scheduled ev = events_.top();
      events_.pop();
      if (ev.t > limit) {
        throw SimulationHalted("simulation did not quiesce within an hour of simulated drain time (" + stuck_state() + ")");
      }
      now_ = ev.t;
      ev.fn();
    }
    if (!finished_) throw SimulationHalted("event queue drained before the run completed");
    SimResult r;
    r.metrics = metrics();
    r.trace = std::move(trace_);
    return r;
  }

 private:
  // ---- scheduling and tracing ----

  void at(std::int64_t t, std::function<void()> fn) { events_.push(Scheduled{t, next_seq_++, std::move(fn)}); }

  Event& emit(EventType type, int server) {
    scratch_ = Event{};
    scratch_.type = type;
    scratch_.server = server;
    scratch_.t_us = now_;
    return scratch_;
  }
  void record() {
    if (!spec_.record_trace) return;
    scratch_.seq = trace_.events.size();
    trace_.events.push_back(std::move(scratch_));
  }

  std::int64_t delay(int site_a, int site_b) {
    std::int64_t d = to_us(cfg_.latency.one_way(site_a, site_b));
    if (cfg_.latency.jitter_ms > 0) d += rng_.between(0, to_us(cfg_.latency.jitter_ms));
    return d;
  }

  // Clients of one site spread round-robin over the servers closest to it.
  int nearest_server(int site, int k) const {
    std::vector<int> best{0};
    for (int i = 1; i < n_; ++i) {
      double di = cfg_.latency.one_way(site, servers_[i]->site);
      double db = cfg_.latency.one_way(site, servers_[best.front()]->site);
      if (di < db) best = {i};
      else if (di == db) best.push_back(i);
    }
    return best[static_cast<std::size_t>(k) % best.size()];
  }

  // ---- workload generation ----

  void build_home_keys() {
    for (const auto& [txn, ps] : spec_.params) {
      for (const auto& [name, p] : ps) {
        if (p.kind != ParamSpec::HomeKey) continue;
        auto& per_server = home_keys_[txn + "." + name];
        per_server.assign(n_, {});
        for (std::int64_t k = p.lo; k <= p.hi; ++k) per_server[partition_of(Value{k}, n_)].push_back(k);
        for (int s = 0; s < n_; ++s) {
          if (per_server[s].empty()) {
            throw ConfigError("home_key range of " + txn + "." + name + " has no key for server " + std::to_string(s));
          }
        }
      }
    }
  }

  std::string pick_txn() {
    double x = rng_.unit();
    double acc = 0.0;
    std::string last;
    for (const auto& [name, p] : mix_) {
      if (p <= 0.0) continue;
      acc += p;
      last = name;
      if (x < acc) return name;
    }
    return last;
  }

  Args pick_args(const std::string& txn, const Client& c) {
    Args args;
    const TransactionTemplate& t = *templates_.at(txn);
    for (const auto& name : t.parameters) {
      const ParamSpec& p = spec_.params.at(txn).at(name);
      switch (p.kind) {
        case ParamSpec::HomeKey: {
          const auto& keys = home_keys_.at(txn + "." + name)[c.home];
          args[name] = keys[rng_.below(keys.size())];
          break;
        }
        case ParamSpec::Uniform: args[name] = rng_.between(p.lo, p.hi); break;
        case ParamSpec::Choice: args[name] = p.choices[rng_.below(p.choices.size())]; break;
      }
    }
    return args;
  }

  // ---- clients ----

  void issue(int id) {
    Client& c = clients_[id];
    c.busy = false;
    if (stopping_) return;
    if (spec_.max_ops != 0 && issued_ >= spec_.max_ops) {
      stop();
      return;
    }
    c.txn = pick_txn();
    c.args = pick_args(c.txn, c);
    c.op = ++next_op_;
    c.issued_us = now_;
    c.busy = true;
    ++issued_;
    int target = c.home;
    if (n_ > 1 && spec_.misdirect_prob > 0.0 && rng_.unit() < spec_.misdirect_prob) {
      int other = static_cast<int>(rng_.below(static_cast<std::uint64_t>(n_ - 1)));
      target = other >= c.home ? other + 1 : other;
    }
    send_request(id, target);
  }

  void send_request(int client, int server) {
    std::int64_t d = delay(clients_[client].site, servers_[server]->site);
    at(now_ + d, [this, client, server] { on_request(server, client); });
  }

  void on_client_reply(int client, OpClass cls, bool error) {
    Client& c = clients_[client];
    completions_.push_back(Completion{c.issued_us, now_, cls, error});
    c.busy = false;
    if (spec_.think_time_ms > 0) {
      c.busy = true;  // still counts as active until the next issue
      at(now_ + to_us(spec_.think_time_ms), [this, client] { issue(client); });
    } else {
      issue(client);
    }
  }

  void stop() {
    if (stopping_) return;
    stopping_ = true;
    stop_us_ = now_;
  }

  // ---- request handling ----

  void on_request(int s, int client) {
    Client& c = clients_[client];
    Event& req = emit(EventType::Req, s);
    req.op = c.op;
    req.client = client;
    req.txn = c.txn;
    req.args = c.args;
    record();
    RequestAction a = decide_request(*router_, s, c.txn, c.args);
    if (a.kind == RequestAction::Redirect) {
      Event& m = emit(EventType::Map, s);
      m.op = c.op;
      m.client = client;
      m.target = a.target;
      record();
      ++maps_;
      int target = a.target;
      at(now_ + delay(servers_[s]->site, c.site), [this, client, target] { send_request(client, target); });
      return;
    }
    Event& cl = emit(EventType::Class, s);
    cl.op = c.op;
    cl.op_class = to_string(a.op_class);
    record();
    Operation op{c.op, c.txn, c.args};
    if (a.kind == RequestAction::Enqueue) {
      servers_[s]->q.push(std::move(op), client);
      return;
    }
    add_op_job(s, op, client, a.op_class, false);
  }

  void add_op_job(int s, const Operation& op, int client, OpClass cls, bool in_batch) {
    const TransactionTemplate& t = *templates_.at(op.txn);
    Job j;
    j.kind = Job::Op;
    j.server = s;
    j.op_id = op.id;
    j.client = client;
    j.op_class = cls;
    j.in_batch = in_batch;
    j.runner = std::make_unique<OpRunner>(*servers_[s]->engine, bind_operation(t, op.args));
    j.step_us = to_us(spec_.service_time_ms) / static_cast<std::int64_t>(std::max<std::size_t>(1, t.body.size()));
    enqueue_job(std::move(j));
  }

  void enqueue_job(Job j) {
    std::uint64_t id = ++next_job_;
    Server& srv = *servers_[j.server];
    ++srv.jobs;
    int s = j.server;
    jobs_.emplace(id, std::move(j));
    srv.ready.push_back(id);
    dispatch(s);
  }

  // ---- cores ----

  void refresh_wake(Server& srv) {
    std::uint64_t w = srv.engine->wake_epoch();
    if (w == srv.seen_wake) return;
    srv.seen_wake = w;
    for (auto id : srv.parked) srv.ready.push_back(id);
    srv.parked.clear();
  }

  void dispatch(int s) {
    Server& srv = *servers_[s];
    refresh_wake(srv);
    while (srv.free_cores > 0 && !srv.ready.empty()) {
      std::uint64_t id = srv.ready.front();
      srv.ready.pop_front();
      --srv.free_cores;
      start_step(id);
      refresh_wake(srv);
    }
  }

  void start_step(std::uint64_t id) {
    Job& j = jobs_.at(id);
    Server& srv = *servers_[j.server];
    if (j.kind == Job::Op && !j.began) {
      Event& e = emit(EventType::ExecBegin, j.server);
      e.op = j.op_id;
      if (j.in_batch) e.epoch = srv.token.epoch;
      record();
      j.began = true;
    }
    if (j.runner->finished()) {
      at(now_ + j.step_us, [this, id] { after_step(id); });
      return;
    }
    OpRunner::Step st;
    try {
      st = j.runner->step();
    } catch (const ApplyError& e) {
      throw SimulationHalted("server " + std::to_string(j.server) + ": " + e.what());
    }
    switch (st) {
      case OpRunner::Step::Ok: at(now_ + j.step_us, [this, id] { after_step(id); }); break;
      case OpRunner::Step::Blocked:
        srv.parked.push_back(id);
        ++srv.free_cores;
        break;
      case OpRunner::Step::Deadlock: on_deadlock(id); break;
    }
  }

  void after_step(std::uint64_t id) {
    Job& j = jobs_.at(id);
    int s = j.server;
    if (servers_[s]->engine->status(j.runner->txn()) != TxnStatus::Active) {
      on_deadlock(id);
    } else if (j.runner->finished()) {
      complete(id);
    } else {
      start_step(id);
    }
    dispatch(s);
  }

  void on_deadlock(std::uint64_t id) {
    Job& j = jobs_.at(id);
    Server& srv = *servers_[j.server];
    ++srv.free_cores;
    ++j.attempts;
    j.began = false;
    if (j.kind == Job::Op && !j.in_batch && j.attempts > spec_.max_retries) {
      j.runner->abort();
      send_reply(j, "error: deadlock", true);
      --srv.jobs;
      jobs_.erase(id);
      return;
    }
    j.runner->restart();
    // Waiters released by the abort are older; let them go first so the
    // victim cannot win the same race again.
    refresh_wake(srv);
    srv.ready.push_back(id);
  }

  void send_reply(const Job& j, const std::string& reply, bool error) {
    Event& e = emit(EventType::Reply, j.server);
    e.op = j.op_id;
    e.client = j.client;
    e.op_class = to_string(j.op_class);
    e.reply = reply;
    e.error = error;
    record();
    ++replies_;
    if (error) ++errors_;
    int client = j.client;
    OpClass cls = j.op_class;
    at(now_ + delay(servers_[j.server]->site, clients_[client].site),
       [this, client, cls, error] { on_client_reply(client, cls, error); });
  }

  void complete(std::uint64_t id) {
    Job j = std::move(jobs_.at(id));
    jobs_.erase(id);
    Server& srv = *servers_[j.server];
    ++srv.free_cores;
    --srv.jobs;
    if (j.kind == Job::Apply) {
      j.runner->commit();
      Event& e = emit(EventType::Apply, j.server);
      e.op = j.op_id;
      e.epoch = srv.token.epoch;
      record();
      next_apply(j.server);
      return;
    }
    CommitInfo info = j.runner->commit(j.in_batch ? &srv.u : nullptr, j.op_id);
    Event& c = emit(EventType::Commit, j.server);
    c.op = j.op_id;
    c.op_class = to_string(j.op_class);
    c.commit_seq = info.commit_seq;
    c.written = info.written;
    c.update = info.update.to_sql();
    if (j.in_batch) c.epoch = srv.token.epoch;
    record();
    if (j.in_batch) {
      for (auto& entry : srv.u.drain()) {
        Event& a = emit(EventType::Append, j.server);
        a.op = entry.op_id;
        a.epoch = srv.token.epoch;
        a.position = srv.token.entries.size();
        a.update = entry.update.to_sql();
        record();
        srv.token.entries.push_back(TokenEntry{entry.op_id, j.server, std::move(entry.update)});
      }
    }
    send_reply(j, j.runner->reply(), false);
    if (j.in_batch && --srv.batch_left == 0) after_batch(j.server);
  }

  // ---- token handling ----

  void on_token(int s, Token token) {
    Server& srv = *servers_[s];
    srv.holding = true;
    ++token.epoch;
    srv.recv_us = now_;
    if (srv.last_recv_us >= 0) srv.max_gap_ms = std::max(srv.max_gap_ms, (now_ - srv.last_recv_us) / 1000.0);
    srv.last_recv_us = now_;
    ++srv.epochs;
    Event& e = emit(EventType::TokenRecv, s);
    e.epoch = token.epoch;
    e.entries = token.entries.size();
    record();
    TokenIntake intake = take_in(token, s);
    for (auto op : intake.purged) {
      Event& p = emit(EventType::Purge, s);
      p.op = op;
      p.epoch = token.epoch;
      record();
    }
    srv.token = std::move(token);
    srv.to_apply = std::move(intake.to_apply);
    if (spec_.fault == Fault::ReverseApply) std::reverse(srv.to_apply.begin(), srv.to_apply.end());
    srv.apply_next = 0;
    if (spec_.fault == Fault::ExecuteBeforeApply) {
      start_batch(s);
    } else {
      next_apply(s);
    }
  }

  void next_apply(int s) {
    Server& srv = *servers_[s];
    while (srv.apply_next < srv.to_apply.size()) {
      TokenEntry& entry = srv.to_apply[srv.apply_next++];
      if (entry.update.empty()) {
        Event& e = emit(EventType::Apply, s);
        e.op = entry.op_id;
        e.epoch = srv.token.epoch;
        record();
        continue;
      }
      Job j;
      j.kind = Job::Apply;
      j.server = s;
      j.op_id = entry.op_id;
      j.runner = std::make_unique<OpRunner>(*srv.engine, entry.update.statements, true);
      j.step_us = to_us(spec_.apply_time_ms) / static_cast<std::int64_t>(entry.update.statements.size());
      enqueue_job(std::move(j));
      return;
    }
    if (spec_.fault == Fault::ExecuteBeforeApply) {
      finish_token(s);
    } else {
      start_batch(s);
    }
  }

  void start_batch(int s) {
    Server& srv = *servers_[s];
    auto items = srv.q.atomic_snapshot();
    Event& e = emit(EventType::Snapshot, s);
    e.epoch = srv.token.epoch;
    for (const auto& it : items) e.ops.push_back(it.op.id);
    record();
    queue_depth_.push_back(QueueSample{now_, s, items.size()});
    srv.batch_left = items.size();
    if (items.empty()) {
      after_batch(s);
      return;
    }
    for (auto& it : items) add_op_job(s, it.op, it.client, OpClass::Global, true);
  }

  void after_batch(int s) {
    if (spec_.fault == Fault::ExecuteBeforeApply) {
      next_apply(s);
    } else {
      finish_token(s);
    }
  }

  void finish_token(int s) {
    Server& srv = *servers_[s];
    std::int64_t hold = std::max<std::int64_t>(1, to_us(spec_.token_min_hold_ms));
    std::int64_t when = std::max(now_, srv.recv_us + hold);
    at(when, [this, s] { pass_token(s); });
  }

  std::string stuck_state() const {
    std::string out;
    int busy = 0;
    for (const auto& c : clients_) busy += c.busy ? 1 : 0;
    out += std::to_string(busy) + " busy clients";
    for (const auto& s : servers_) {
      out += "; server " + std::to_string(s->id) + ": " + std::to_string(s->jobs) + " jobs, " +
             std::to_string(s->parked.size()) + " parked, " + std::to_string(s->ready.size()) + " ready, " +
             std::to_string(s->free_cores) + " free cores, " + std::to_string(s->q.size()) + " queued, " +
             std::to_string(s->token.entries.size()) + " token entries";
    }
    for (const auto& [id, j] : jobs_) {
      out += "; job " + std::to_string(id) + " (" + (j.kind == Job::Apply ? "apply" : "op") + " " +
             std::to_string(j.op_id) + " at " + std::to_string(j.server) + ", txn " + std::to_string(j.runner->txn()) +
             ", attempts " + std::to_string(j.attempts) + ")";
    }
    return out;
  }

  bool quiescent() const {
    for (const auto& c : clients_) {
      if (c.busy) return false;
    }
    for (const auto& s : servers_) {
      if (s->jobs != 0 || s->q.size() != 0) return false;
    }
    return true;
  }

  void pass_token(int s) {
    Server& srv = *servers_[s];
    srv.hold_total_ms += (now_ - srv.recv_us) / 1000.0;
    if (stopping_ && srv.token.entries.empty() && quiescent()) {
      finish_run();
      return;
    }
    int next = (s + 1) % n_;
    Event& e = emit(EventType::TokenPass, s);
    e.epoch = srv.token.epoch;
    e.target = next;
    record();
    srv.holding = false;
    std::int64_t d = next == s ? 0 : delay(srv.site, servers_[next]->site);
    Token token = std::move(srv.token);
    srv.token = Token{};
    srv.token.epoch = token.epoch;
    at(now_ + d, [this, next, token = std::move(token)]() mutable { on_token(next, std::move(token)); });
  }

  void finish_run() {
    finished_ = true;
    end_us_ = now_;
    for (const auto& srv : servers_) {
      Event& e = emit(EventType::Final, srv->id);
      if (spec_.record_trace) {
        e.dump = srv->engine->dump();
        e.digest = digest_of(e.dump);
      }
      record();
    }
  }

  // ---- metrics ----

  MetricsReport metrics() const {
    MetricsReport m;
    m.scenario = cfg_.scenario;
    m.servers = n_;
    m.clients = static_cast<int>(clients_.size());
    m.issued = issued_;
    m.replies = replies_;
    m.maps = maps_;
    m.errors = errors_;
    m.in_flight = issued_ - replies_;
    m.end_us = end_us_;
    std::int64_t from = to_us(spec_.warmup_ms);
    std::int64_t to = stop_us_;
    double window_s = static_cast<double>(to - from) / 1e6;
    for (const char* cls : {"all", "local", "global", "commutative"}) {
      std::vector<double> lat;
      for (const auto& c : completions_) {
        if (c.error || c.issued_us < from || c.done_us > to) continue;
        if (std::string(cls) != "all" && to_string(c.op_class) != cls) continue;
        lat.push_back(static_cast<double>(c.done_us - c.issued_us) / 1000.0);
      }
      ClassMetrics cm;
      cm.op_class = cls;
      cm.count = lat.size();
      if (!lat.empty()) {
        std::sort(lat.begin(), lat.end());
        double sum = 0.0;
        for (double v : lat) sum += v;
        cm.mean_ms = sum / static_cast<double>(lat.size());
        auto rank = [&](double q) {
          auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(lat.size())));
          return lat[std::max<std::size_t>(k, 1) - 1];
        };
        cm.p50_ms = rank(0.50);
        cm.p99_ms = rank(0.99);
        cm.throughput = window_s > 0 ? static_cast<double>(lat.size()) / window_s : 0.0;
      }
      m.classes.push_back(cm);
    }
    for (const auto& srv : servers_) {
      ServerTokenStats ts;
      ts.server = srv->id;
      ts.epochs = srv->epochs;
      ts.mean_hold_ms = srv->epochs ? srv->hold_total_ms / static_cast<double>(srv->epochs) : 0.0;
      ts.max_gap_ms = srv->max_gap_ms;
      m.token.push_back(ts);
    }
    m.queue_depth = queue_depth_;
    return m;
  }

  SimConfig cfg_;
  WorkloadSpec spec_;
  Rng rng_;
  int n_;
  PartitionResult partition_;
  std::unique_ptr<Router> router_;
  std::map<std::string, const TransactionTemplate*> templates_;
  std::map<std::string, double> mix_;
  std::map<std::string, std::vector<std::vector<std::int64_t>>> home_keys_;

  std::vector<std::unique_ptr<Server>> servers_;
  std::vector<Client> clients_;
  std::map<std::uint64_t, Job> jobs_;

  std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>> events_;
  std::uint64_t next_seq_ = 0;
  std::int64_t now_ = 0;
  std::uint64_t next_op_ = 0;
  std::uint64_t next_job_ = 0;

  bool stopping_ = false;
  bool finished_ = false;
  std::int64_t stop_us_ = 0;
  std::int64_t end_us_ = 0;
  std::uint64_t issued_ = 0;
  std::uint64_t replies_ = 0;
  std::uint64_t maps_ = 0;
  std::uint64_t errors_ = 0;
  std::vector<Completion> completions_;
  std::vector<QueueSample> queue_depth_;

  Trace trace_;
  Event scratch_;
};

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

const ClassMetrics* MetricsReport::find(const std::string& op_class) const {
  for (const auto& c : classes) {
    if (c.op_class == op_class) return &c;
  }
  return nullptr;
}

std::string MetricsReport::csv_header() { return "scenario,servers,clients,class,throughput,mean_ms,p50_ms,p99_ms\n"; }

std::string MetricsReport::csv_rows() const {
  std::string out;
  for (const auto& c : classes) {
    out += scenario + "," + std::to_string(servers) + "," + std::to_string(clients) + "," + c.op_class + "," +
           fixed3(c.throughput) + "," + fixed3(c.mean_ms) + "," + fixed3(c.p50_ms) + "," + fixed3(c.p99_ms) + "\n";
  }
  return out;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["format"] = "opart-metrics/1";
  j["scenario"] = scenario;
  j["servers"] = servers;
  j["clients"] = clients;
  j["issued"] = issued;
  j["replies"] = replies;
  j["maps"] = maps;
  j["errors"] = errors;
  j["in_flight"] = in_flight;
  j["end_ms"] = static_cast<double>(end_us) / 1000.0;
  nlohmann::json cls = nlohmann::json::array();
  for (const auto& c : classes) {
    cls.push_back({{"class", c.op_class},
                   {"count", c.count},
                   {"throughput", c.throughput},
                   {"mean_ms", c.mean_ms},
                   {"p50_ms", c.p50_ms},
                   {"p99_ms", c.p99_ms}});
  }
  j["classes"] = std::move(cls);
  nlohmann::json tok = nlohmann::json::array();
  for (const auto& t : token) {
    tok.push_back({{"server", t.server}, {"epochs", t.epochs}, {"mean_hold_ms", t.mean_hold_ms}, {"max_gap_ms", t.max_gap_ms}});
  }
  j["token"] = std::move(tok);
  nlohmann::json q = nlohmann::json::array();
  for (const auto& s : queue_depth) q.push_back({s.t_us, s.server, s.depth});
  j["queue_depth"] = std::move(q);
  return j.dump(2) + "\n";
}

SimResult simulate(const SimConfig& config) {
  Simulation sim(config);
  return sim.run();
}

}  // namespace opart

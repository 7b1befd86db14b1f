// Copyright 2026 The pmset Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pmset/simulation.hpp"

#include <semaphore>
#include <thread>

#include "pmset/thread_context.hpp"

namespace pmset {
namespace {

// Thrown out of a parked worker when the run is aborted. Deliberately not
// an std::exception so nothing on the way up catches it by accident.
struct Unwind {};

}  // namespace

struct Simulation::Worker final : StepGate {
  WorkerStatus st;
  Body body;
  std::binary_semaphore go{0};
  std::binary_semaphore back{0};
  bool abort = false;
  std::exception_ptr error;
  std::thread thread;

  void arrive() override {
    back.release();
    go.acquire();
    if (abort) throw Unwind{};
  }

  void main(SimSubstrate& sub) {
    ThreadContext& ctx = this_thread_context();
    ctx.worker = st.id;
    ctx.gate = this;
    go.acquire();
    if (!abort) {
      try {
        for (std::size_t i = 0; i < st.program.size(); ++i) {
          if (i > 0) arrive();
          const OpSpec& op = st.program[i];
          st.in_flight = op;
          sub.log_invoke(op.kind, op.key);
          const bool r = body(op);
          arrive();
          sub.log_respond(op.kind, op.key, r);
          st.in_flight.reset();
          st.results.push_back(r);
        }
      } catch (const Unwind&) {
        st.aborted = true;
      } catch (...) {
        error = std::current_exception();
      }
    } else {
      st.aborted = true;
    }
    st.done = true;
    back.release();
  }
};

Simulation::Simulation(SimSubstrate& sub) : sub_(sub) {}

Simulation::~Simulation() { abort_all(); }

WorkerId Simulation::spawn(std::vector<OpSpec> program, Body body) {
  auto w = std::make_unique<Worker>();
  w->st.id = next_id_++;
  w->st.program = std::move(program);
  w->body = std::move(body);
  if (w->st.program.empty()) {
    w->st.done = true;
  } else {
    Worker* raw = w.get();
    w->thread = std::thread([raw, this] { raw->main(sub_); });
  }
  workers_.push_back(std::move(w));
  return workers_.back()->st.id;
}

Simulation::Worker* Simulation::find(WorkerId w) const {
  for (const auto& p : workers_) {
    if (p->st.id == w) return p.get();
  }
  return nullptr;
}

bool Simulation::runnable(WorkerId w) const {
  const Worker* p = find(w);
  return p != nullptr && !p->st.done;
}

std::vector<WorkerId> Simulation::runnable_workers() const {
  std::vector<WorkerId> out;
  for (const auto& p : workers_) {
    if (!p->st.done) out.push_back(p->st.id);
  }
  return out;
}

std::vector<WorkerId> Simulation::ids() const {
  std::vector<WorkerId> out;
  for (const auto& p : workers_) out.push_back(p->st.id);
  return out;
}

const WorkerStatus& Simulation::status(WorkerId w) const {
  const Worker* p = find(w);
  if (p == nullptr) throw ConfigError("unknown worker " + std::to_string(w));
  return p->st;
}

bool Simulation::step(WorkerId w) {
  Worker* p = find(w);
  if (p == nullptr || p->st.done) return false;
  p->go.release();
  p->back.acquire();
  ++steps_;
  if (p->st.done && p->thread.joinable()) p->thread.join();
  if (p->error) {
    std::exception_ptr e = p->error;
    p->error = nullptr;
    std::rethrow_exception(e);
  }
  return true;
}

void Simulation::abort_all() {
  for (const auto& p : workers_) {
    if (!p->st.done) {
      p->abort = true;
      p->go.release();
      p->back.acquire();
    }
    if (p->thread.joinable()) p->thread.join();
  }
}

}  // namespace pmset

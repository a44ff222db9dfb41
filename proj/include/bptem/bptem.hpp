#pragma once

#include <bptem/errors.hpp>
#include <bptem/grid.hpp>
#include <bptem/fft.hpp>
#include <bptem/filters.hpp>
#include <bptem/test_signal.hpp>
#include <bptem/noise.hpp>
#include <bptem/signal_io.hpp>
#include <bptem/tem.hpp>
#include <bptem/tem_io.hpp>
#include <bptem/intervals.hpp>
#include <bptem/operators.hpp>
#include <bptem/pocs.hpp>
#include <bptem/apocs.hpp>
#include <bptem/closed_form.hpp>
#include <bptem/metrics.hpp>
#include <bptem/config.hpp>
#include <bptem/experiments.hpp>

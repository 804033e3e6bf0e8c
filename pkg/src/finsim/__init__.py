"""Simulation of a two-motor crank-slider robotic fish: reel kinematics, tail loads,
planar swimming and heading feedback."""

from .body import BodyParams, BodyState, inverse_dynamics, motor_load_profile
from .control import ControllerConfig, HeadingSample, closed_loop_simulate, control_update, detect_mean_crossing
from .errors import ConfigError, FinsimError, OutputError, SimulationError
from .kernels import BACKEND
from .mechanism import MechanismGeometry, Mode, ModeCommand, generate_mode_trajectory, solve_reel_angle
from .swim import SwimParams, SwimState, calibrate, simulate_swimming, step_swim, strouhal_number, tail_reaction
from .timeseries import TimeSeries

__version__ = "0.1.0"

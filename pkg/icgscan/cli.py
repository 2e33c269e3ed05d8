"""
命令行界面模块
~~~~~~~~~~

处理命令行操作，每个子命令一个处理函数，返回进程退出码
"""

import argparse
import logging
import sys
from typing import Any, Optional

import yaml

from .config import build_params, config, load_grid, load_params, load_synth_spec
from .core import DelineationParams, SamplingRateRequiredError
from .evaluation import calibrate, evaluate_corpus, evaluate_record, sweep_filter_lengths
from .pipeline import IcgDelineator
from .records import (
    attach_amplitudes,
    load_corpus,
    read_annotations,
    read_signal,
    save_record,
    write_annotations,
    write_plot_data,
    write_table,
)
from .report import format_for_path, get_report_generator
from .synth import generate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


def setup_logging(verbose: bool = False) -> None:
    """设置日志

    Args:
        verbose: 是否显示详细日志
    """
    log_level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )


def _one_line(error: BaseException) -> str:
    return " ".join(str(error).split())


def _fail(command: str, error: BaseException, path: Optional[Any] = None) -> int:
    """记录单行错误信息并选择退出码

    Args:
        command: 子命令名称
        error: 捕获的异常
        path: 出错的文件路径，不在错误信息中时加在前面

    Returns:
        退出码: 缺少采样率为 1，其余数据错误为 2
    """
    message = _one_line(error)
    if path is not None and str(path) not in message:
        message = f"{path}: {message}"
    logger.error(f"{command} failed: {message}")
    if isinstance(error, SamplingRateRequiredError):
        return EXIT_USAGE
    return EXIT_DATA


def resolve_params(args: argparse.Namespace) -> DelineationParams:
    """解析描记参数: 预设(--preset 或配置文件)，配置中的覆盖项，最后是 --params 文件

    Args:
        args: 命令行参数

    Returns:
        校验后的描记参数
    """
    params = config.delineation_params(getattr(args, 'preset', None))
    if getattr(args, 'params', None):
        params = load_params(args.params, params)
    return params


def _workers(args: argparse.Namespace) -> int:
    """线程数: --workers 优先，否则取 evaluation.max_workers"""
    if getattr(args, 'workers', None):
        return args.workers
    return int(config.get('evaluation', 'max_workers', 1))


def _tolerance(args: argparse.Namespace) -> float:
    """匹配容差(毫秒): --tolerance-ms 优先，否则取 evaluation.tolerance_ms"""
    if getattr(args, 'tolerance_ms', None) is not None:
        return args.tolerance_ms
    return float(config.get('evaluation', 'tolerance_ms', 30.0))


def _emit_report(result, output_path: Optional[str]) -> None:
    """输出报告

    Args:
        result: EvalReport 或其他带 to_dict 的结果
        output_path: 输出文件路径，格式由扩展名决定；为None时打印键值文本
    """
    if output_path:
        generator = get_report_generator(format_for_path(output_path, config.get('output', 'format', 'text')))
        generator.generate_report(result, output_path)
    else:
        sys.stdout.write(get_report_generator('text').generate_report(result))


def delineate(args: argparse.Namespace) -> int:
    """描记单条记录，写出逐拍标注

    Args:
        args: 命令行参数

    Returns:
        退出码
    """
    try:
        params = resolve_params(args)
        signal = read_signal(args.input, args.fs)
        result = IcgDelineator(params, args.filter_length).run(signal)
        write_annotations(args.out, result.beats)
    except (ValueError, OSError) as e:
        return _fail('delineate', e, args.input)

    logger.info(
        f"{len(result.beats)} beats from {args.input} written to {args.out} "
        f"(mean filter length {result.mean_filter_length or 0:.1f})"
    )
    return EXIT_OK


def evaluate(args: argparse.Namespace) -> int:
    """将检测标注与参考标注比对并输出报告

    Args:
        args: 命令行参数

    Returns:
        退出码
    """
    try:
        detected = read_annotations(args.detected)
        reference = read_annotations(args.reference)
        fs = args.fs
        if args.signal:
            signal = read_signal(args.signal, args.fs)
            fs = signal.fs
            detected = attach_amplitudes(detected, signal)
            reference = attach_amplitudes(reference, signal)
        if fs is None:
            raise SamplingRateRequiredError("eval needs --fs or a --signal file with a time column")
        report = evaluate_record(detected, reference, fs, _tolerance(args))
        _emit_report(report, args.out)
    except (ValueError, OSError) as e:
        return _fail('eval', e)
    return EXIT_OK


def synth(args: argparse.Namespace) -> int:
    """按合成心搏描述生成记录及真值标注

    Args:
        args: 命令行参数

    Returns:
        退出码
    """
    try:
        params = resolve_params(args)
        spec = load_synth_spec(args.spec)
        fs = args.fs or float(config.get('synth', 'fs', 250.0))
        seconds = args.seconds or float(config.get('synth', 'seconds', 30.0))
        seed = args.seed if args.seed is not None else int(config.get('synth', 'seed', 0))
        record = generate(spec, seconds, fs, seed=seed, params=params)
        signal_path, truth_path = save_record(record, args.out)
    except (ValueError, OSError) as e:
        return _fail('synth', e, args.spec)

    logger.info(f"{len(record.beats)} {spec.morphology} beats written to {signal_path} and {truth_path}")
    return EXIT_OK


def calibrate_params(args: argparse.Namespace) -> int:
    """在参数网格上标定，写出每个网格点的得分表

    Args:
        args: 命令行参数

    Returns:
        退出码
    """
    try:
        params = resolve_params(args)
        grid = load_grid(args.grid)
        corpus = load_corpus(args.corpus, args.fs)
        result = calibrate(
            corpus,
            grid,
            base_params=params,
            tolerance_ms=_tolerance(args),
            max_workers=_workers(args),
            progress=args.progress,
        )
        write_table(args.out, result.table_rows())
    except (ValueError, OSError) as e:
        return _fail('calibrate', e)

    best = result.best_row
    logger.info(f"best grid point #{best.index} {best.overrides} objective {best.objective:.2f}; table in {args.out}")
    return EXIT_OK


def parse_lengths(text: str) -> list:
    """解析逗号分隔的滤波长度列表

    Args:
        text: 例如 "3,5,7"

    Returns:
        正奇数长度列表

    Raises:
        argparse.ArgumentTypeError: 不是整数或不是正奇数
    """
    try:
        lengths = [int(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")
    if not lengths or any(length < 1 or length % 2 == 0 for length in lengths):
        raise argparse.ArgumentTypeError(f"filter lengths must be positive odd integers, got '{text}'")
    return lengths


def sweep(args: argparse.Namespace) -> int:
    """比较固定滤波长度与自适应滤波，写出扫描表

    Args:
        args: 命令行参数

    Returns:
        退出码
    """
    lengths = args.lengths or list(config.get('evaluation', 'sweep_lengths', [5, 9, 13, 17, 21, 25]))
    try:
        params = resolve_params(args)
        corpus = load_corpus(args.corpus, args.fs)
        result = sweep_filter_lengths(
            corpus,
            lengths,
            params=params,
            tolerance_ms=_tolerance(args),
            max_workers=_workers(args),
            progress=args.progress,
        )
        write_table(args.out, result.table_rows())
    except (ValueError, OSError) as e:
        return _fail('sweep', e)

    logger.info(f"sweep over {len(lengths)} fixed lengths plus adaptive written to {args.out}")
    return EXIT_OK


def score_corpus(args: argparse.Namespace) -> int:
    """在语料目录上运行描记并输出汇总报告

    Args:
        args: 命令行参数

    Returns:
        退出码
    """
    try:
        params = resolve_params(args)
        corpus = load_corpus(args.corpus, args.fs)
        report = evaluate_corpus(
            corpus,
            params,
            args.filter_length,
            tolerance_ms=_tolerance(args),
            max_workers=_workers(args),
            progress=args.progress,
        )
        _emit_report(report, args.out)
    except (ValueError, OSError) as e:
        return _fail('score', e)
    return EXIT_OK


def plotdata(args: argparse.Namespace) -> int:
    """导出带标注点的绘图数据

    Args:
        args: 命令行参数

    Returns:
        退出码
    """
    try:
        signal = read_signal(args.input, args.fs)
        beats = read_annotations(args.annotations)
        write_plot_data(args.out, signal, beats)
    except (ValueError, OSError) as e:
        return _fail('plotdata', e)

    logger.info(f"plot data for {len(beats)} beats written to {args.out}")
    return EXIT_OK


def config_show_or_set(args: argparse.Namespace) -> int:
    """显示配置，或用 --set SECTION.KEY=VALUE 修改配置

    Args:
        args: 命令行参数

    Returns:
        退出码
    """
    if args.set:
        key, sep, raw = args.set.partition('=')
        section, dot, name = key.strip().partition('.')
        if not sep or not dot or not name:
            logger.error(f"--set expects SECTION.KEY=VALUE, got '{args.set}'")
            return EXIT_USAGE
        try:
            value = yaml.safe_load(raw) if raw.strip() else None
            if section == 'delineation' and name not in ('preset', 'overrides'):
                overrides = dict(config.get('delineation', 'overrides', {}) or {})
                overrides[name] = value
                build_params(config.get('delineation', 'preset', 'physiological'), overrides)
                config.set('delineation', 'overrides', overrides)
            else:
                if section == 'delineation' and name == 'preset':
                    build_params(str(value))
                config.set(section, name, value)
        except (ValueError, OSError, yaml.YAMLError) as e:
            return _fail('config', e, config.config_file)
        logger.info(f"{section}.{name} set in {config.config_file}")
        return EXIT_OK

    print(f"# {config.config_file}")
    print(yaml.safe_dump(config.config, default_flow_style=False, allow_unicode=True), end='')
    return EXIT_OK


def main(args: argparse.Namespace) -> int:
    """主函数

    Args:
        args: 命令行参数

    Returns:
        退出码
    """
    setup_logging(getattr(args, 'verbose', False))

    command = args.command

    if command == 'delineate':
        return delineate(args)
    elif command == 'eval':
        return evaluate(args)
    elif command == 'score':
        return score_corpus(args)
    elif command == 'synth':
        return synth(args)
    elif command == 'calibrate':
        return calibrate_params(args)
    elif command == 'sweep':
        return sweep(args)
    elif command == 'plotdata':
        return plotdata(args)
    elif command == 'config':
        return config_show_or_set(args)
    else:
        logger.error(f"unknown command: {command}")
        return EXIT_USAGE


from sys import argv, exit
import os

from dnnmip import engine, cli

if __name__ == '__main__':
    from optparse import OptionParser
    op = OptionParser(prog='run',
                      usage='%prog [options] <command> [command options]')
    # everything from the command name on is for the command
    op.disable_interspersed_args()
    op.add_option('-p', '--profile', action='store_true')
    op.add_option('-n', '--num-stats', action='store', type='int',
                  help='number of functions to show when profiling; '
                  'defaults to 30')
    op.add_option('-f', '--profile-file', action='store',
                  type='string', help='defaults to \'.profile_stats\'')
    op.add_option('-s', '--sort-stats', action='store', type='string',
                  help='profile stats sort mode; defaults to '
                  '\'cumulative\' (see pstats.Stats.sort_stats doc)')
    op.set_defaults(profile=False, num_stats=30,
                    profile_file='.profile_stats', sort_stats='cumulative')
    options, args = op.parse_args(argv[1:])
    if options.profile:
        from cProfile import run
        from pstats import Stats
        result = {}
        run('result["code"] = cli.run(args)', options.profile_file, locals())
        Stats(options.profile_file).strip_dirs() \
            .sort_stats(options.sort_stats).print_stats(options.num_stats)
        os.unlink(options.profile_file)
        code = result['code']
    else:
        code = cli.run(args)

    engine.quit()
    exit(code)

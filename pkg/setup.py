from glob import glob

from setuptools import setup, find_packages

setup(
    name='dnnmip',
    version='0.1.0',
    description='ReLU networks as 0-1 mixed-integer programs: bound '
                'tightening, feature visualization and adversarial examples',
    packages=find_packages(exclude=('tests',)),
    data_files=[('share/dnnmip/nets', glob('data/nets/*.net'))],
    python_requires='>=3.8',
    install_requires=['numpy', 'pygame'],
    extras_require={'test': ['pytest']},
    entry_points={'console_scripts': ['dnnmip = dnnmip.cli:main']}
)
